//! Asymptotic expansions of the normalized width on power and power-log
//! bases: interpolation, extrapolation tests, perturbation stability and
//! coefficient-growth diagnostics.

use crate::error::{Error, Result};
use crate::maps::MapFamily;
use crate::numerics::{log10_abs, BigReal, Precision};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SequenceKind {
    /// `f_i(x) = x^i`.
    Polynomial,
    /// `1, x, x^2 L, x^2, x^3, x^4 L, x^4, ...` with `L` a logarithm.
    Dulac,
}

/// Quantity being expanded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FitTarget {
    LogWidth,
    Width,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticSequence {
    pub kind: SequenceKind,
    /// `x = s^(1/power)` where `s` is the scan coordinate.
    pub power: u32,
    /// The log-bearing terms carry `log_factor * log x`.
    pub log_factor: u32,
    pub target: FitTarget,
    symbols: Symbols,
}

#[derive(Clone, Debug, PartialEq)]
struct Symbols {
    main: &'static str,
    log: &'static str,
    power_coef: &'static str,
    log_coef: &'static str,
}

impl AsymptoticSequence {
    pub fn polynomial(power: u32, target: FitTarget) -> Self {
        Self {
            kind: SequenceKind::Polynomial,
            power,
            log_factor: 0,
            target,
            symbols: Symbols { main: "s", log: "", power_coef: "a", log_coef: "" },
        }
    }

    pub fn dulac(power: u32, log_factor: u32, target: FitTarget) -> Self {
        Self {
            kind: SequenceKind::Dulac,
            power,
            log_factor,
            target,
            symbols: Symbols { main: "s", log: "log s", power_coef: "a", log_coef: "b" },
        }
    }

    /// The expansion used for each family: Dulac in `mu^(1/4)` with `log mu`
    /// (Quadratic), Dulac in `a^(1/2)` with `log a^(1/2)` (Bogdanov),
    /// polynomial in `|1 - a~|^(1/4)` for the width itself (Henon).
    pub fn for_family(family: &MapFamily) -> Self {
        match family {
            MapFamily::Quadratic { .. } => Self {
                symbols: Symbols { main: "mu", log: "log mu", power_coef: "M", log_coef: "N" },
                ..Self::dulac(4, 4, FitTarget::LogWidth)
            },
            MapFamily::Bogdanov { .. } => Self {
                symbols: Symbols { main: "a", log: "log a^{1/2}", power_coef: "A", log_coef: "B" },
                ..Self::dulac(2, 1, FitTarget::LogWidth)
            },
            MapFamily::Henon => Self {
                symbols: Symbols { main: "|1-a~|", log: "", power_coef: "A~", log_coef: "" },
                ..Self::polynomial(4, FitTarget::Width)
            },
        }
    }

    /// Exponent of `x` in `f_i`.
    pub fn x_power(&self, i: usize) -> u32 {
        match self.kind {
            SequenceKind::Polynomial => i as u32,
            SequenceKind::Dulac => {
                let n = (i / 3) as u32;
                match i % 3 {
                    0 => 2 * n,
                    1 => 2 * n + 1,
                    _ => 2 * n + 2,
                }
            }
        }
    }

    pub fn has_log(&self, i: usize) -> bool {
        self.kind == SequenceKind::Dulac && i % 3 == 2
    }

    /// Number of basis functions for the truncation order `ell`: `3 ell / 2 + 1`
    /// (Dulac, `ell` even) or `ell + 1` (polynomial).
    pub fn basis_size_for_ell(&self, ell: usize) -> Result<usize> {
        match self.kind {
            SequenceKind::Polynomial => Ok(ell + 1),
            SequenceKind::Dulac if ell % 2 == 0 => Ok(3 * ell / 2 + 1),
            SequenceKind::Dulac => Err(Error::InvalidInput(format!("truncation order {ell} must be even"))),
        }
    }

    pub fn eval_basis(&self, i: usize, x: &BigReal) -> BigReal {
        let prec = x.prec();
        let mut v = BigReal::with_val(prec, 1);
        let e = self.x_power(i);
        if e > 0 {
            v = BigReal::with_val(prec, x.pow_ref_u(e));
        }
        if self.has_log(i) {
            let mut l = BigReal::with_val(prec, x.ln_ref());
            l *= self.log_factor;
            v *= l;
        }
        v
    }

    /// Value interpolated at a node with normalized log-width `log_s`.
    pub fn target_value(&self, log_s: &BigReal) -> BigReal {
        match self.target {
            FitTarget::LogWidth => log_s.clone(),
            FitTarget::Width => BigReal::with_val(log_s.prec(), log_s.exp_ref()),
        }
    }

    /// Display name of coefficient `i`: `M_3`, `N_1`, `A~_0`.
    pub fn coefficient_name(&self, i: usize) -> String {
        let s = &self.symbols;
        match self.kind {
            SequenceKind::Polynomial => format!("{}_{}", s.power_coef, i),
            SequenceKind::Dulac => match i % 3 {
                0 => format!("{}_{}", s.power_coef, 2 * (i / 3)),
                1 => format!("{}_{}", s.power_coef, 2 * (i / 3) + 1),
                _ => format!("{}_{}", s.log_coef, i / 3 + 1),
            },
        }
    }

    /// Scale of coefficient `i` in the main parameter, e.g. `mu^{3/4}` or `a log a^{1/2}`.
    pub fn label(&self, i: usize) -> String {
        let s = &self.symbols;
        let pow = fraction_power(s.main, self.x_power(i), self.power);
        if self.has_log(i) {
            if pow == "1" {
                s.log.to_string()
            } else {
                format!("{pow} {}", s.log)
            }
        } else {
            pow
        }
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn fraction_power(sym: &str, num: u32, den: u32) -> String {
    if num == 0 {
        return "1".into();
    }
    let g = gcd(num, den);
    let (n, d) = (num / g, den / g);
    match (n, d) {
        (1, 1) => sym.to_string(),
        (n, 1) => format!("{sym}^{{{n}}}"),
        (n, d) => format!("{sym}^{{{n}/{d}}}"),
    }
}

trait PowRefU {
    fn pow_ref_u(&self, e: u32) -> BigReal;
}

impl PowRefU for BigReal {
    fn pow_ref_u(&self, e: u32) -> BigReal {
        use rug::ops::Pow;
        BigReal::with_val(self.prec(), self.pow(e))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataNode {
    /// Expansion variable.
    pub x: BigReal,
    /// Natural log of the normalized width.
    pub log_s: BigReal,
}

/// Normalized widths on a grid of the expansion variable.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WidthDataset {
    pub meta: BTreeMap<String, String>,
    pub nodes: Vec<DataNode>,
}

impl WidthDataset {
    pub fn validate(&self) -> Result<()> {
        for (i, n) in self.nodes.iter().enumerate() {
            if !n.log_s.is_finite() || !n.x.is_finite() {
                return Err(Error::InvalidInput(format!("node {i} is not finite")));
            }
            if i > 0 && n.x <= self.nodes[i - 1].x {
                return Err(Error::InvalidInput(format!("node {i}: x is not strictly increasing")));
            }
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<BigReal> {
        self.nodes.iter().map(|n| n.x.clone()).collect()
    }
}

pub type Matrix = Vec<Vec<BigReal>>;

/// `A[j][i] = f_i(x_j)` for `n_basis` functions; rows are nodes.
pub fn design_matrix(seq: &AsymptoticSequence, xs: &[BigReal], n_basis: usize) -> Result<Matrix> {
    for (j, x) in xs.iter().enumerate() {
        if !x.is_sign_positive() || x.is_zero() {
            return Err(Error::Domain(format!("node {j}: expansion variable must be positive")));
        }
        if xs[..j].iter().any(|y| y == x) {
            return Err(Error::Singular(format!("node {j} duplicates an earlier node")));
        }
    }
    Ok(xs.iter().map(|x| (0..n_basis).map(|i| seq.eval_basis(i, x)).collect()).collect())
}

/// Square interpolation matrix with one basis function per node.
pub fn build_matrix(seq: &AsymptoticSequence, xs: &[BigReal]) -> Result<Matrix> {
    design_matrix(seq, xs, xs.len())
}

/// LU factors with row pivoting, `P A = L U`.
struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(mut a: Matrix, ctx: &Precision) -> Result<Self> {
        let n = a.len();
        if a.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("matrix is not square".into()));
        }
        let prec = ctx.bits();
        let scale = a
            .iter()
            .flatten()
            .map(|v| BigReal::with_val(prec, v.abs_ref()))
            .fold(ctx.zero(), |m, v| if v > m { v } else { m });
        let tiny = scale * ctx.pow10(-(ctx.total() as i32));
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, _) = (k..n)
                .map(|r| (r, BigReal::with_val(prec, a[r][k].abs_ref())))
                .fold((k, ctx.zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if BigReal::with_val(prec, a[p][k].abs_ref()) <= tiny {
                return Err(Error::Conditioning(format!("pivot underflow at order {k}")));
            }
            a.swap(k, p);
            perm.swap(k, p);
            let (upper, lower) = a.split_at_mut(k + 1);
            let pivot = &upper[k];
            for row in lower.iter_mut() {
                let m = BigReal::with_val(prec, &row[k] / &pivot[k]);
                for c in k + 1..n {
                    row[c] -= BigReal::with_val(prec, &m * &pivot[c]);
                }
                row[k] = m;
            }
        }
        Ok(Self { lu: a, perm })
    }

    fn solve(&self, b: &[BigReal]) -> Vec<BigReal> {
        let n = self.lu.len();
        let prec = b.first().map_or(64, |v| v.prec());
        let mut y: Vec<BigReal> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                let t = BigReal::with_val(prec, &self.lu[i][j] * &y[j]);
                y[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = BigReal::with_val(prec, &self.lu[i][j] * &y[j]);
                y[i] -= t;
            }
            y[i] /= &self.lu[i][i];
        }
        y
    }
}

fn inf_norm(rows: &[Vec<BigReal>], prec: u32) -> BigReal {
    rows.iter()
        .map(|r| r.iter().fold(BigReal::new(prec), |s, v| s + BigReal::with_val(prec, v.abs_ref())))
        .fold(BigReal::new(prec), |m, v| if v > m { v } else { m })
}

/// Fitted coefficients of one expansion.
#[derive(Clone, Debug)]
pub struct ExpansionCoefficients {
    pub sequence: AsymptoticSequence,
    pub alpha: Vec<BigReal>,
    /// Largest node residual `|sum_i alpha_i f_i(x_j) - w_j|`.
    pub max_residual: BigReal,
    /// `log10` of the infinity-norm condition number.
    pub log10_condition: f64,
    pub nodes_used: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientEntry {
    pub index: usize,
    pub name: String,
    pub label: String,
    pub value: BigReal,
}

impl ExpansionCoefficients {
    pub fn entries(&self) -> Vec<CoefficientEntry> {
        self.alpha
            .iter()
            .enumerate()
            .map(|(i, v)| CoefficientEntry {
                index: i,
                name: self.sequence.coefficient_name(i),
                label: self.sequence.label(i),
                value: v.clone(),
            })
            .collect()
    }

    /// Truncated sum over the first `terms` basis functions.
    pub fn eval(&self, x: &BigReal, terms: usize) -> BigReal {
        let mut s = BigReal::new(x.prec());
        for (i, a) in self.alpha.iter().take(terms).enumerate() {
            s += BigReal::with_val(x.prec(), a * &self.sequence.eval_basis(i, x));
        }
        s
    }

    /// Limit of the normalized width at the bifurcation: `exp(alpha_0)` or `alpha_0`.
    pub fn constant_value(&self) -> BigReal {
        match self.sequence.target {
            FitTarget::LogWidth => BigReal::with_val(self.alpha[0].prec(), self.alpha[0].exp_ref()),
            FitTarget::Width => self.alpha[0].clone(),
        }
    }

    /// First coefficient carrying a logarithm, if the sequence has one.
    pub fn first_log_coefficient(&self) -> Option<&BigReal> {
        (0..self.alpha.len()).find(|&i| self.sequence.has_log(i)).map(|i| &self.alpha[i])
    }
}

/// Gaussian elimination with partial pivoting on a square system.
pub fn solve_coefficients(seq: &AsymptoticSequence, a: &Matrix, w: &[BigReal], ctx: &Precision) -> Result<ExpansionCoefficients> {
    let n = a.len();
    if w.len() != n {
        return Err(Error::InvalidInput(format!("{n} rows but {} data values", w.len())));
    }
    let prec = ctx.bits();
    let lu = Lu::factor(a.clone(), ctx)?;
    let alpha = lu.solve(w);
    let mut max_residual = ctx.zero();
    for (row, wj) in a.iter().zip(w) {
        let mut r = BigReal::with_val(prec, -wj);
        for (aij, al) in row.iter().zip(&alpha) {
            r += BigReal::with_val(prec, aij * al);
        }
        r.abs_mut();
        if r > max_residual {
            max_residual = r;
        }
    }
    let mut inv_cols = Vec::with_capacity(n);
    for k in 0..n {
        let e: Vec<BigReal> = (0..n).map(|i| ctx.real(u32::from(i == k))).collect();
        inv_cols.push(lu.solve(&e));
    }
    let inv_rows: Matrix = (0..n).map(|i| inv_cols.iter().map(|c| c[i].clone()).collect()).collect();
    let cond = inf_norm(a, prec) * inf_norm(&inv_rows, prec);
    Ok(ExpansionCoefficients {
        sequence: seq.clone(),
        alpha,
        max_residual,
        log10_condition: log10_abs(&cond),
        nodes_used: n,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum FitMode {
    /// Exact interpolation on the first `basis` nodes.
    #[default]
    Interpolate,
    /// Normal equations over every node.
    LeastSquares,
}

pub fn fit(seq: &AsymptoticSequence, data: &WidthDataset, basis: usize, mode: FitMode, ctx: &Precision) -> Result<ExpansionCoefficients> {
    data.validate()?;
    if basis == 0 || data.nodes.len() < basis {
        return Err(Error::InvalidInput(format!(
            "basis of size {basis} needs at least that many nodes, dataset has {}",
            data.nodes.len()
        )));
    }
    let prec = ctx.bits();
    let nodes: Vec<&DataNode> = match mode {
        FitMode::Interpolate => data.nodes.iter().take(basis).collect(),
        FitMode::LeastSquares => data.nodes.iter().collect(),
    };
    let xs: Vec<BigReal> = nodes.iter().map(|n| ctx.adopt(&n.x)).collect();
    let w: Vec<BigReal> = nodes.iter().map(|n| seq.target_value(&ctx.adopt(&n.log_s))).collect();
    let a = design_matrix(seq, &xs, basis)?;
    match mode {
        FitMode::Interpolate => solve_coefficients(seq, &a, &w, ctx),
        FitMode::LeastSquares => {
            let ata: Matrix = (0..basis)
                .map(|i| {
                    (0..basis)
                        .map(|k| a.iter().fold(ctx.zero(), |s, r| s + BigReal::with_val(prec, &r[i] * &r[k])))
                        .collect()
                })
                .collect();
            let atw: Vec<BigReal> = (0..basis)
                .map(|i| a.iter().zip(&w).fold(ctx.zero(), |s, (r, wj)| s + BigReal::with_val(prec, &r[i] * wj)))
                .collect();
            let mut out = solve_coefficients(seq, &ata, &atw, ctx)?;
            let mut worst = ctx.zero();
            for (row, wj) in a.iter().zip(&w) {
                let mut r = BigReal::with_val(prec, -wj);
                for (aij, al) in row.iter().zip(&out.alpha) {
                    r += BigReal::with_val(prec, aij * al);
                }
                r.abs_mut();
                if r > worst {
                    worst = r;
                }
            }
            out.max_residual = worst;
            out.nodes_used = a.len();
            Ok(out)
        }
    }
}

/// `width / K(main)`.
pub fn normalize_width(family: &MapFamily, main: &BigReal, width: &BigReal) -> Result<BigReal> {
    if !width.is_sign_positive() || width.is_zero() {
        return Err(Error::InvalidInput("width must be positive".into()));
    }
    let k = family.leading_width(main)?;
    Ok(BigReal::with_val(width.prec(), width / &k))
}

/// Closed form of the first logarithmic coefficient: `-(6 (gamma - 2) / (7 sqrt 2))^2`
/// (Quadratic) or `-(6 gamma / 7)^2` (Bogdanov).
pub fn analytic_first_log_coefficient(family: &MapFamily) -> Result<BigReal> {
    match family {
        MapFamily::Quadratic { gamma } => {
            let prec = gamma.prec();
            let g = BigReal::with_val(prec, gamma - 2u32);
            let mut v = BigReal::with_val(prec, g.square_ref()) * 18u32;
            v /= 49u32;
            Ok(-v)
        }
        MapFamily::Bogdanov { gamma } => {
            let prec = gamma.prec();
            let mut v = BigReal::with_val(prec, gamma.square_ref()) * 36u32;
            v /= 49u32;
            Ok(-v)
        }
        MapFamily::Henon => Err(Error::InvalidInput("the Henon expansion has no logarithmic terms".into())),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtrapolabilityReport {
    /// `(log s, log |G_trunc - data|)` per holdout node.
    pub pairs: Vec<(f64, f64)>,
    /// Least-squares slope of the pairs.
    pub slope: f64,
    /// Exponent of the first omitted basis function in `s`.
    pub expected: f64,
    pub truncation: usize,
}

impl ExtrapolabilityReport {
    pub fn relative_slope_error(&self) -> f64 {
        ((self.slope - self.expected) / self.expected).abs()
    }
}

fn ln_f64(x: &BigReal) -> f64 {
    log10_abs(x) * std::f64::consts::LN_10
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Residual of the expansion truncated to `truncation` terms at nodes outside
/// the fitting window.
pub fn extrapolability_test(coeffs: &ExpansionCoefficients, truncation: usize, holdout: &[DataNode]) -> Result<ExtrapolabilityReport> {
    if holdout.len() < 2 {
        return Err(Error::InvalidInput("extrapolability needs at least two holdout nodes".into()));
    }
    if truncation == 0 || truncation > coeffs.alpha.len() {
        return Err(Error::InvalidInput(format!(
            "truncation {truncation} outside 1..={}",
            coeffs.alpha.len()
        )));
    }
    let seq = &coeffs.sequence;
    let p = f64::from(seq.power);
    let mut pairs = Vec::new();
    for n in holdout {
        let x = BigReal::with_val(coeffs.alpha[0].prec(), &n.x);
        let g = coeffs.eval(&x, truncation);
        let r = g - seq.target_value(&n.log_s);
        if r.is_zero() {
            continue;
        }
        pairs.push((ln_f64(&x) * p, ln_f64(&r)));
    }
    if pairs.len() < 2 {
        return Err(Error::Conditioning("holdout residuals vanish at working precision".into()));
    }
    Ok(ExtrapolabilityReport {
        slope: ls_slope(&pairs),
        expected: f64::from(seq.x_power(truncation)) / p,
        pairs,
        truncation,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub digits: u32,
    pub trials: usize,
    /// Worst `log10 |(alpha_i^pert - alpha_i) / alpha_i|` over the trials.
    pub log10_rel_error: Vec<f64>,
}

impl StabilityReport {
    /// `-log10` relative error of coefficient `i`, capped at `cap`.
    pub fn matched_digits(&self, i: usize, cap: f64) -> f64 {
        (-self.log10_rel_error[i]).min(cap)
    }
}

/// Perturbs every `log S` by a uniform `[-1, 1] 10^-digits` draw and refits.
pub fn stability_test(
    seq: &AsymptoticSequence,
    data: &WidthDataset,
    basis: usize,
    digits: u32,
    trials: usize,
    seed: u64,
    ctx: &Precision,
) -> Result<StabilityReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is needed".into()));
    }
    let base = fit(seq, data, basis, FitMode::Interpolate, ctx)?;
    let scale = ctx.pow10(-(digits as i32));
    let runs: Vec<Result<Vec<f64>>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let unit = Uniform::new_inclusive(-1.0f64, 1.0);
            let mut perturbed = data.clone();
            for n in perturbed.nodes.iter_mut() {
                let d = ctx.real(unit.sample(&mut rng)) * &scale;
                n.log_s = ctx.adopt(&n.log_s) + d;
            }
            let c = fit(seq, &perturbed, basis, FitMode::Interpolate, ctx)?;
            Ok(c.alpha
                .iter()
                .zip(&base.alpha)
                .map(|(p, b)| {
                    if b.is_zero() {
                        log10_abs(p)
                    } else {
                        log10_abs(&(BigReal::with_val(ctx.bits(), p - b) / b))
                    }
                })
                .collect())
        })
        .collect();
    let mut worst = vec![f64::NEG_INFINITY; basis];
    for r in runs {
        for (w, e) in worst.iter_mut().zip(r?) {
            *w = w.max(e);
        }
    }
    Ok(StabilityReport { digits, trials, log10_rel_error: worst })
}

/// `-log10 |(reference - c) / reference|` with `c` the fitted constant term.
pub fn splitting_constant_check(coeffs: &ExpansionCoefficients, reference: &BigReal) -> f64 {
    let c = coeffs.constant_value();
    let prec = c.prec().max(reference.prec());
    let rel = BigReal::with_val(prec, reference - &c) / reference;
    -log10_abs(&rel)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GevreyReport {
    pub m: f64,
    pub r: f64,
    /// Growth is sub-factorial: the fitted `r` keeps increasing along the sequence.
    pub r_unbounded: bool,
}

/// Fits `|alpha_k| <= M k! / r^k`: `r` from the regression of
/// `log(|alpha_k| / k!)` on `k`, `M` as the envelope at that `r`.
pub fn gevrey_diagnostic(alpha: &[BigReal]) -> Result<GevreyReport> {
    if alpha.len() < 10 {
        return Err(Error::InvalidInput("the growth diagnostic needs at least 10 coefficients".into()));
    }
    let mut pts = Vec::new();
    let mut ln_fact = 0.0;
    for (k, a) in alpha.iter().enumerate() {
        if k > 0 {
            ln_fact += (k as f64).ln();
        }
        if k == 0 || a.is_zero() {
            continue;
        }
        pts.push((k as f64, ln_f64(a) - ln_fact));
    }
    if pts.len() < 4 {
        return Err(Error::InvalidInput("too few nonzero coefficients".into()));
    }
    let r = (-ls_slope(&pts)).exp();
    let tail = &pts[pts.len() / 2..];
    let r_tail = (-ls_slope(tail)).exp();
    let m = pts.iter().map(|&(k, l)| (l + k * r.ln()).exp()).fold(0.0, f64::max);
    Ok(GevreyReport { m, r, r_unbounded: r_tail > 1.5 * r })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Precision {
        Precision::with_digits(60).unwrap()
    }

    #[test]
    fn dulac_layout() {
        let seq = AsymptoticSequence::for_family(&MapFamily::Quadratic { gamma: ctx().real(-3) });
        let names: Vec<String> = (0..7).map(|i| seq.coefficient_name(i)).collect();
        assert_eq!(names, ["M_0", "M_1", "N_1", "M_2", "M_3", "N_2", "M_4"]);
        assert_eq!(seq.label(1), "mu^{1/4}");
        assert_eq!(seq.label(2), "mu^{1/2} log mu");
        assert_eq!(seq.label(6), "mu");
        let b = AsymptoticSequence::for_family(&MapFamily::Bogdanov { gamma: ctx().real(3) });
        assert_eq!(b.label(2), "a log a^{1/2}");
        assert_eq!(b.coefficient_name(5), "B_2");
        let h = AsymptoticSequence::for_family(&MapFamily::Henon);
        assert_eq!(h.label(4), "|1-a~|");
        assert_eq!(h.coefficient_name(3), "A~_3");
    }

    #[test]
    fn dulac_rows() {
        let c = ctx();
        let seq = AsymptoticSequence::dulac(4, 4, FitTarget::LogWidth);
        let xs: Vec<BigReal> = ["0.1", "0.2", "0.3"].iter().map(|s| c.parse(s).unwrap()).collect();
        let a = build_matrix(&seq, &xs).unwrap();
        for (row, x) in a.iter().zip(&xs) {
            assert_eq!(row[0], 1u32);
            assert_eq!(row[1], *x);
            let want = BigReal::with_val(c.bits(), x.square_ref()) * (BigReal::with_val(c.bits(), x.ln_ref()) * 4u32);
            assert!((row[2].clone() - want).abs().to_f64() < 1e-70);
        }
    }

    #[test]
    fn duplicate_nodes_are_singular() {
        let c = ctx();
        let seq = AsymptoticSequence::polynomial(1, FitTarget::LogWidth);
        let xs = vec![c.real(1), c.real(2), c.real(1)];
        assert!(matches!(build_matrix(&seq, &xs), Err(Error::Singular(_))));
    }

    #[test]
    fn constant_data() {
        let c = ctx();
        let seq = AsymptoticSequence::polynomial(1, FitTarget::LogWidth);
        let nodes = (1..=5)
            .map(|i| DataNode { x: c.real(i) / 10u32, log_s: c.parse("2.5").unwrap() })
            .collect();
        let ds = WidthDataset { nodes, ..Default::default() };
        let f = fit(&seq, &ds, 5, FitMode::Interpolate, &c).unwrap();
        assert!((f.alpha[0].clone() - c.parse("2.5").unwrap()).abs().to_f64() < 1e-60);
        assert!(f.alpha[1..].iter().all(|a| a.clone().abs().to_f64() < 1e-55));
    }

    #[test]
    fn closed_form_log_coefficients() {
        let c = ctx();
        let q = analytic_first_log_coefficient(&MapFamily::Quadratic { gamma: c.real(-3) }).unwrap();
        assert!((q + c.real(900) / 98u32).abs().to_f64() < 1e-70);
        let b = analytic_first_log_coefficient(&MapFamily::Bogdanov { gamma: c.real(3) }).unwrap();
        assert!((b + c.real(324) / 49u32).abs().to_f64() < 1e-70);
        let z = analytic_first_log_coefficient(&MapFamily::Bogdanov { gamma: c.real(0) }).unwrap();
        assert!(z.is_zero());
        assert!(analytic_first_log_coefficient(&MapFamily::Henon).is_err());
    }

    #[test]
    fn gevrey_factorial_and_geometric() {
        let c = ctx();
        let mut fact = c.real(1);
        let alpha: Vec<BigReal> = (0..20)
            .map(|k| {
                if k > 0 {
                    fact *= k;
                }
                BigReal::with_val(c.bits(), &fact / c.real(2).pow_ref_u(k))
            })
            .collect();
        let g = gevrey_diagnostic(&alpha).unwrap();
        assert!((g.r - 2.0).abs() < 1e-9, "{g:?}");
        assert!(!g.r_unbounded);
        let geo: Vec<BigReal> = (0..20).map(|k| c.real(1) / c.real(3).pow_ref_u(k)).collect();
        assert!(gevrey_diagnostic(&geo).unwrap().r_unbounded);
        assert!(gevrey_diagnostic(&geo[..5]).is_err());
    }
}
