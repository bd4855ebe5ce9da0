//! Power-series parameterizations of the local stable and unstable manifolds
//! of the saddle, `Phi(lambda z) = F(Phi(z))`, and continuation of the
//! unstable branch by iteration.

use crate::error::{Error, Result};
use crate::maps::{MapFamily, ParamPoint, QuadraticMap, SaddleData, Vec2};
use crate::numerics::{log10_abs, BigComplex, BigReal, Precision};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    Stable,
    Unstable,
}

/// Truncated series `Phi(z) = sum_k coeffs[k] z^k`; `coeffs[0]` is the saddle.
#[derive(Clone, Debug)]
pub struct ManifoldSeries {
    pub branch: Branch,
    pub lambda: BigReal,
    pub coeffs: Vec<Vec2>,
    /// Largest `|z|` accepted by [`ManifoldSeries::eval_local`].
    pub radius: f64,
}

/// Evaluation radii and series orders for one parameter point.
#[derive(Clone, Debug)]
pub struct DomainPlan {
    /// Cauchy-Hadamard radius estimate of the stable series.
    pub rho_s: f64,
    /// Effective radius of the (entire) unstable series over the same window.
    pub rho_u: f64,
    pub delta_s: f64,
    pub delta_u: f64,
    /// Stable parameter of the section anchor.
    pub z_s: f64,
    /// Largest unstable parameter reached by continuation, `lambda2^m0 * delta_u`.
    pub z0: f64,
    pub m0: usize,
    pub n_stable: usize,
    pub n_unstable: usize,
}

/// Fixed-order series used only to estimate radii; independent of precision
/// so the plan varies smoothly with the parameters.
pub const ESTIMATE_ORDER: usize = 64;
pub const ESTIMATE_WINDOW: std::ops::RangeInclusive<usize> = 52..=64;
pub const MAX_ORDER: usize = 6000;

/// Tunable ratios of [`plan_domains`].
#[derive(Clone, Debug, PartialEq)]
pub struct PlanRatios {
    /// `delta_s = rho_s * delta_s_ratio`.
    pub delta_s_ratio: f64,
    /// `z_s = rho_s * anchor_ratio`.
    pub anchor_ratio: f64,
    /// `delta_u = rho_u * delta_u_ratio`.
    pub delta_u_ratio: f64,
    /// Largest `|Re t|` at which the stable branch is sampled.
    pub t_reach: f64,
    /// Iterations budget for the unstable continuation.
    pub max_iterations: usize,
}

impl Default for PlanRatios {
    fn default() -> Self {
        Self {
            delta_s_ratio: 0.5,
            anchor_ratio: 0.25,
            delta_u_ratio: 0.01,
            t_reach: 1.0,
            max_iterations: 4000,
        }
    }
}

fn sq_conv(a: &[BigReal], k: usize, prec: u32) -> BigReal {
    // sum_{j=1}^{k-1} a_j a_{k-j}
    let mut s = BigReal::new(prec);
    for j in 1..(k + 1) / 2 {
        s += &a[j] * &a[k - j];
    }
    s *= 2u32;
    if k % 2 == 0 {
        s += &a[k / 2] * &a[k / 2];
    }
    s
}

fn cross_conv(a: &[BigReal], b: &[BigReal], k: usize, prec: u32) -> BigReal {
    let mut s = BigReal::new(prec);
    for j in 1..k {
        s += &a[j] * &b[k - j];
    }
    s
}

/// Series of order `n_max` from known saddle data.
pub fn series_from_saddle(
    map: &QuadraticMap,
    saddle: &SaddleData,
    branch: Branch,
    n_max: usize,
    ctx: &Precision,
) -> Result<ManifoldSeries> {
    if n_max < 2 {
        return Err(Error::InvalidInput("series order must be at least 2".into()));
    }
    if n_max > MAX_ORDER {
        return Err(Error::Capacity(format!("series order {n_max} above cap {MAX_ORDER}")));
    }
    let prec = ctx.bits();
    let (lambda, v1) = match branch {
        Branch::Stable => (&saddle.lambda1, &saddle.eigvec1),
        Branch::Unstable => (&saddle.lambda2, &saddle.eigvec2),
    };
    let a = &saddle.jacobian;
    let tol = ctx.pow10(-(ctx.digits() as i32) / 2);
    let mut xs: Vec<BigReal> = Vec::with_capacity(n_max + 1);
    let mut ys: Vec<BigReal> = Vec::with_capacity(n_max + 1);
    xs.push(saddle.point[0].clone());
    ys.push(saddle.point[1].clone());
    xs.push(v1[0].clone());
    ys.push(v1[1].clone());
    let use_q = |i: usize, j: usize| !map.q[i][j].is_zero();
    let need_xx = use_q(0, 0) || use_q(1, 0);
    let need_xy = use_q(0, 1) || use_q(1, 1);
    let need_yy = use_q(0, 2) || use_q(1, 2);
    let mut lk = BigReal::with_val(prec, lambda);
    for k in 2..=n_max {
        lk *= lambda;
        let sxx = need_xx.then(|| sq_conv(&xs, k, prec));
        let sxy = need_xy.then(|| cross_conv(&xs, &ys, k, prec));
        let syy = need_yy.then(|| sq_conv(&ys, k, prec));
        let rhs = |i: usize| {
            let mut r = BigReal::new(prec);
            if let Some(s) = &sxx {
                r += &map.q[i][0] * s;
            }
            if let Some(s) = &sxy {
                r += &map.q[i][1] * s;
            }
            if let Some(s) = &syy {
                r += &map.q[i][2] * s;
            }
            r
        };
        let (r0, r1) = (rhs(0), rhs(1));
        let m00 = BigReal::with_val(prec, &lk - &a[0][0]);
        let m11 = BigReal::with_val(prec, &lk - &a[1][1]);
        let mut det = BigReal::with_val(prec, &m00 * &m11);
        det -= &a[0][1] * &a[1][0];
        if BigReal::with_val(prec, det.abs_ref()) < tol {
            return Err(Error::Degenerate(format!("resonant denominator at order {k}")));
        }
        let mut x = BigReal::with_val(prec, &m11 * &r0);
        x += &a[0][1] * &r1;
        x /= &det;
        let mut y = BigReal::with_val(prec, &a[1][0] * &r0);
        y += &m00 * &r1;
        y /= &det;
        xs.push(x);
        ys.push(y);
    }
    let coeffs = xs.into_iter().zip(ys).map(|(x, y)| [x, y]).collect();
    Ok(ManifoldSeries { branch, lambda: lambda.clone(), coeffs, radius: f64::INFINITY })
}

/// Stable or unstable series of order `n_max` at `p`.
pub fn compute_series(
    family: &MapFamily,
    p: &ParamPoint,
    branch: Branch,
    n_max: usize,
    ctx: &Precision,
) -> Result<ManifoldSeries> {
    let saddle = family.saddle(p, ctx)?;
    series_from_saddle(&family.quadratic_form(p), &saddle, branch, n_max, ctx)
}

impl ManifoldSeries {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn base(&self) -> &Vec2 {
        &self.coeffs[0]
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    /// `log10 max(|x_k|, |y_k|)`.
    pub fn log10_coeff(&self, k: usize) -> f64 {
        let c = &self.coeffs[k];
        log10_abs(&c[0]).max(log10_abs(&c[1]))
    }

    /// Geometric mean of `|c_k|^(-1/k)` over `window`.
    pub fn radius_estimate(&self, window: std::ops::RangeInclusive<usize>) -> f64 {
        let (mut sum, mut n) = (0.0, 0usize);
        for k in window {
            if k == 0 || k > self.order() {
                continue;
            }
            let l = self.log10_coeff(k);
            if l.is_finite() {
                sum += -l / k as f64;
                n += 1;
            }
        }
        if n == 0 {
            f64::INFINITY
        } else {
            10f64.powf(sum / n as f64)
        }
    }

    pub fn eval(&self, z: &BigReal) -> Vec2 {
        let prec = z.prec();
        let mut out = [BigReal::new(prec), BigReal::new(prec)];
        for (i, o) in out.iter_mut().enumerate() {
            for c in self.coeffs.iter().rev() {
                *o *= z;
                *o += &c[i];
            }
        }
        out
    }

    /// `(Phi(z), Phi'(z))`.
    pub fn eval_with_derivative(&self, z: &BigReal) -> (Vec2, Vec2) {
        let prec = z.prec();
        let mut p = [BigReal::new(prec), BigReal::new(prec)];
        let mut d = [BigReal::new(prec), BigReal::new(prec)];
        for i in 0..2 {
            for c in self.coeffs.iter().rev() {
                d[i] *= z;
                d[i] += &p[i];
                p[i] *= z;
                p[i] += &c[i];
            }
        }
        (p, d)
    }

    pub fn eval_complex(&self, z: &BigComplex) -> [BigComplex; 2] {
        let prec = z.prec();
        let mut out = [BigComplex::new(prec), BigComplex::new(prec)];
        for (i, o) in out.iter_mut().enumerate() {
            for c in self.coeffs.iter().rev() {
                *o *= z;
                *o += &c[i];
            }
        }
        out
    }

    pub fn eval_complex_with_derivative(&self, z: &BigComplex) -> ([BigComplex; 2], [BigComplex; 2]) {
        let prec = z.prec();
        let mut p = [BigComplex::new(prec), BigComplex::new(prec)];
        let mut d = [BigComplex::new(prec), BigComplex::new(prec)];
        for i in 0..2 {
            for c in self.coeffs.iter().rev() {
                d[i] *= z;
                d[i] += &p[i];
                p[i] *= z;
                p[i] += &c[i];
            }
        }
        (p, d)
    }

    /// Horner evaluation guarded by the branch radius.
    pub fn eval_local(&self, z: &BigComplex) -> Result<[BigComplex; 2]> {
        let r = BigReal::with_val(53, z.abs_ref()).to_f64();
        if r > self.radius {
            return Err(Error::Domain(format!(
                "|z| = {r:.3e} outside the series radius {:.3e}",
                self.radius
            )));
        }
        Ok(self.eval_complex(z))
    }

    /// `||Phi(lambda z) - F(Phi(z))||_inf`.
    pub fn conjugacy_residual(&self, map: &QuadraticMap, z: &BigReal) -> BigReal {
        let lz = BigReal::with_val(z.prec(), z * &self.lambda);
        let lhs = self.eval(&lz);
        let rhs = map.eval(&self.eval(z));
        let d0 = BigReal::with_val(z.prec(), &lhs[0] - &rhs[0]).abs();
        let d1 = BigReal::with_val(z.prec(), &lhs[1] - &rhs[1]).abs();
        d0.max(&d1)
    }
}

/// `F^m(Phi_u(lambda2^(-m) z))`.
pub fn eval_global_unstable(
    map: &QuadraticMap,
    series: &ManifoldSeries,
    z: &BigComplex,
    m: usize,
    bound: f64,
) -> Result<[BigComplex; 2]> {
    let prec = z.prec().0;
    let mut w = z.clone();
    let mut scale = BigReal::with_val(prec, &series.lambda);
    scale.pow_assign_u(m);
    w /= &scale;
    let mut pt = series.eval_local(&w)?;
    for _ in 0..m {
        pt = map.eval_complex(&pt);
        check_bound(&pt, bound)?;
    }
    Ok(pt)
}

fn check_bound(pt: &[BigComplex; 2], bound: f64) -> Result<()> {
    for c in pt {
        let r = BigReal::with_val(53, c.abs_ref()).to_f64();
        if !r.is_finite() || r > bound {
            return Err(Error::Convergence(format!("orbit left the box of size {bound:e}")));
        }
    }
    Ok(())
}

trait PowAssignU {
    fn pow_assign_u(&mut self, e: usize);
}

impl PowAssignU for BigReal {
    fn pow_assign_u(&mut self, e: usize) {
        use rug::ops::PowAssign;
        self.pow_assign(e as u32);
    }
}

/// Order needed for `(r / rho)^N <= 10^-digits`.
fn order_for(r: f64, rho: f64, digits: f64) -> usize {
    let ratio = (r / rho).log10();
    if !(ratio < 0.0) {
        return MAX_ORDER + 1;
    }
    (digits / -ratio).ceil() as usize + 2
}

/// Chooses radii and series orders so the truncation error at the used radii
/// is below `10^-target_digits`.
pub fn plan_domains(
    family: &MapFamily,
    p: &ParamPoint,
    target_digits: f64,
    ratios: &PlanRatios,
    ctx: &Precision,
) -> Result<DomainPlan> {
    if !(target_digits > 0.0) {
        return Err(Error::InvalidInput("target residual must be positive".into()));
    }
    let saddle = family.saddle(p, ctx)?;
    let map = family.quadratic_form(p);
    let est = Precision::new(60, 20)?;
    let pe = ParamPoint::new(est.adopt(&p.main), est.adopt(&p.slave));
    let fam_e = family.adopt(&est);
    let saddle_e = fam_e.saddle(&pe, &est)?;
    let map_e = fam_e.quadratic_form(&pe);
    let s_est = series_from_saddle(&map_e, &saddle_e, Branch::Stable, ESTIMATE_ORDER, &est)?;
    let u_est = series_from_saddle(&map_e, &saddle_e, Branch::Unstable, ESTIMATE_ORDER, &est)?;
    let rho_s = s_est.radius_estimate(ESTIMATE_WINDOW);
    let rho_u = u_est.radius_estimate(ESTIMATE_WINDOW);
    if !rho_s.is_finite() || !rho_u.is_finite() {
        return Err(Error::Degenerate("manifold series vanish identically".into()));
    }
    let delta_s = rho_s * ratios.delta_s_ratio;
    let z_s = rho_s * ratios.anchor_ratio;
    let delta_u = rho_u * ratios.delta_u_ratio;
    let l1 = saddle.lambda1.to_f64();
    let l2 = saddle.lambda2.to_f64();
    let reach = (z_s * l1.powf(-ratios.t_reach)).max(z_s);
    let n_stable = order_for(reach, rho_s, target_digits);
    let n_unstable = order_for(delta_u, rho_u, target_digits);
    if n_stable > MAX_ORDER || n_unstable > MAX_ORDER || reach >= delta_s {
        return Err(Error::Capacity(format!(
            "target 1e-{target_digits:.0} needs orders ({n_stable}, {n_unstable}) above cap {MAX_ORDER} \
             (rho_s = {rho_s:.3e}, reach = {reach:.3e})"
        )));
    }
    let m0 = ratios.max_iterations;
    let z0 = delta_u * l2.powf(m0 as f64);
    let _ = map;
    Ok(DomainPlan { rho_s, rho_u, delta_s, delta_u, z_s, z0, m0, n_stable, n_unstable })
}
