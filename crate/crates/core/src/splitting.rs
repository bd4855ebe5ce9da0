//! Splitting determinant, primary homoclinic orbits, first harmonics and
//! width estimates.

use crate::error::{Error, Result};
use crate::manifolds::{plan_domains, series_from_saddle, Branch, DomainPlan, ManifoldSeries, PlanRatios};
use crate::maps::{MapFamily, ParamPoint, QuadraticMap, SaddleData, Vec2};
use crate::numerics::{log10_abs, log10_abs_complex, BigComplex, BigReal, Precision};
use crate::variational::{jacobian_along_stable, wronskian_series, JacobianSeries, WronskianSeries};

/// Knobs of the homoclinic search and width estimators.
#[derive(Clone, Debug, PartialEq)]
pub struct SplittingConfig {
    pub ratios: PlanRatios,
    pub max_secant: usize,
    pub max_newton: usize,
    /// Orbits leaving `|x|, |y| <= bound` are rejected.
    pub bound: f64,
    /// Strip half-width is `(pi - strip_margin * pi) / |log lambda1|`.
    pub strip_margin: f64,
    /// Largest accepted relative spread of the finite-difference slope over
    /// `t in {0, 1/4, 1/2}`.
    pub slope_spread_guard: f64,
    /// Evaluate harmonics at the zone centre instead of at the located orbit.
    pub center_anchor: bool,
}

impl Default for SplittingConfig {
    fn default() -> Self {
        Self {
            ratios: PlanRatios::default(),
            max_secant: 60,
            max_newton: 200,
            bound: 1e6,
            strip_margin: 0.1,
            slope_spread_guard: 0.1,
            center_anchor: true,
        }
    }
}

/// Everything that depends on the slave parameter at a fixed main parameter.
#[derive(Clone, Debug)]
pub struct ManifoldPair {
    pub param: ParamPoint,
    pub map: QuadraticMap,
    pub saddle: SaddleData,
    pub stable: ManifoldSeries,
    pub unstable: ManifoldSeries,
    pub jacobian: JacobianSeries,
    pub wronskian: WronskianSeries,
    pub ln_l1: BigReal,
    pub ln_l2: BigReal,
}

/// A computation job: one family, one main parameter, one precision.
#[derive(Clone, Debug)]
pub struct Node {
    pub family: MapFamily,
    pub main: BigReal,
    pub ctx: Precision,
    pub plan: DomainPlan,
    pub cfg: SplittingConfig,
}

/// Section anchor and unstable-side parameters of a primary homoclinic orbit.
#[derive(Clone, Debug)]
pub struct HomoclinicFrame {
    /// Stable parameter of the anchor `p = Phi_s(z_s)`.
    pub z_s: BigReal,
    /// Local unstable parameter: `Gamma_u(t) = F^m(Phi_u(zeta lambda2^t))`.
    pub zeta: BigReal,
    pub m: usize,
    /// Global unstable parameter `zeta lambda2^m`.
    pub z_u: BigReal,
    /// Slave value at which the frame was located.
    pub slave: BigReal,
    /// Section half-width.
    pub y0: BigReal,
    /// Signed section gap `y` at `slave`.
    pub gap: BigReal,
    pub steps: Vec<SecantStep>,
}

#[derive(Clone, Debug)]
pub struct SecantStep {
    pub slave: BigReal,
    pub gap: BigReal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WidthMethod {
    Real,
    Complex,
}

impl WidthMethod {
    pub fn name(&self) -> &'static str {
        match self {
            WidthMethod::Real => "real",
            WidthMethod::Complex => "complex",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Harmonics {
    Real { r0: BigReal, rm1: BigComplex, rp1: BigComplex },
    Complex { cm1: BigComplex, delta: BigReal, four_point: bool },
}

impl Harmonics {
    pub fn first(&self) -> &BigComplex {
        match self {
            Harmonics::Real { rm1, .. } => rm1,
            Harmonics::Complex { cm1, .. } => cm1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct WidthEstimate {
    pub value: BigReal,
    pub method: WidthMethod,
    /// `log10` of the relative error bound.
    pub error_exponent: f64,
    /// Slave value at which the harmonics were sampled.
    pub anchor: BigReal,
    pub harmonics: Harmonics,
    /// Finite-difference slope of the splitting determinant in the slave parameter.
    pub slope: BigReal,
    /// Relative spread of the slope over `t in {0, 1/4, 1/2}`.
    pub slope_spread: f64,
    pub frame: HomoclinicFrame,
    /// `log10 e^(2 pi delta)` for the complex method, 0 otherwise.
    pub log10_strip_gain: f64,
}

/// A point of `W^u` on the section.
#[derive(Clone, Debug)]
struct Crossing {
    k: usize,
    sigma: BigReal,
    point: Vec2,
    anchor: Vec2,
}

fn real_to_big(ctx: &Precision, v: f64) -> BigReal {
    ctx.real(v)
}

impl Node {
    /// Plans the domains at `seed_slave` and fixes them for the whole job.
    pub fn new(family: &MapFamily, main: &BigReal, seed_slave: &BigReal, ctx: &Precision, cfg: &SplittingConfig) -> Result<Self> {
        let family = family.adopt(ctx);
        let main = ctx.adopt(main);
        family.check_admissible(&main)?;
        let p = ParamPoint::new(main.clone(), ctx.adopt(seed_slave));
        let plan = plan_domains(&family, &p, f64::from(ctx.total()), &cfg.ratios, ctx)?;
        Ok(Self { family, main, ctx: *ctx, plan, cfg: cfg.clone() })
    }

    pub fn pair(&self, slave: &BigReal) -> Result<ManifoldPair> {
        let ctx = &self.ctx;
        let param = ParamPoint::new(self.main.clone(), ctx.adopt(slave));
        let saddle = self.family.saddle(&param, ctx)?;
        let map = self.family.quadratic_form(&param);
        let stable = series_from_saddle(&map, &saddle, Branch::Stable, self.plan.n_stable, ctx)?
            .with_radius(self.plan.delta_s);
        let unstable = series_from_saddle(&map, &saddle, Branch::Unstable, self.plan.n_unstable, ctx)?
            .with_radius(self.plan.delta_u);
        let jacobian = jacobian_along_stable(&map, &stable, ctx);
        let wronskian = wronskian_series(&jacobian, &saddle.lambda1, ctx)?;
        let ln_l1 = BigReal::with_val(ctx.bits(), saddle.lambda1.ln_ref());
        let ln_l2 = BigReal::with_val(ctx.bits(), saddle.lambda2.ln_ref());
        Ok(ManifoldPair { param, map, saddle, stable, unstable, jacobian, wronskian, ln_l1, ln_l2 })
    }

    pub fn z_s(&self) -> BigReal {
        real_to_big(&self.ctx, self.plan.z_s)
    }

    fn z_base(&self, pair: &ManifoldPair) -> BigReal {
        let mut z = real_to_big(&self.ctx, self.plan.delta_u);
        z /= &pair.saddle.lambda2;
        z /= &pair.saddle.lambda2;
        z
    }

    /// Strip half-width `rho = (1 - margin) pi / |log lambda1|` at the seed slave.
    pub fn strip_halfwidth(&self, pair: &ManifoldPair) -> BigReal {
        let mut r = self.ctx.pi();
        r *= 1.0 - self.cfg.strip_margin;
        r / BigReal::with_val(self.ctx.bits(), pair.ln_l1.abs_ref())
    }

    fn check_strip(&self, pair: &ManifoldPair, t: &BigComplex) -> Result<()> {
        let mut lim = self.ctx.pi();
        lim *= 1.0 - 0.5 * self.cfg.strip_margin;
        let reach = BigReal::with_val(self.ctx.bits(), t.imag() * &pair.ln_l1).abs();
        if reach >= lim {
            return Err(Error::Domain(format!(
                "Im t = {:.4} outside the analyticity strip",
                t.imag().to_f64()
            )));
        }
        Ok(())
    }

    /// `(Gamma_s(t), dGamma_s/dt)`.
    pub fn gamma_s(&self, pair: &ManifoldPair, frame: &HomoclinicFrame, t: &BigComplex) -> Result<([BigComplex; 2], [BigComplex; 2])> {
        self.check_strip(pair, t)?;
        let prec = self.ctx.bits();
        let mut z = BigComplex::with_val(prec, t * &pair.ln_l1);
        z.exp_mut();
        z *= &frame.z_s;
        self.check_radius(&z, self.plan.delta_s)?;
        let (p, mut d) = pair.stable.eval_complex_with_derivative(&z);
        for c in d.iter_mut() {
            *c *= &z;
            *c *= &pair.ln_l1;
        }
        Ok((p, d))
    }

    pub fn gamma_u(&self, pair: &ManifoldPair, frame: &HomoclinicFrame, t: &BigComplex) -> Result<[BigComplex; 2]> {
        self.check_strip(pair, t)?;
        let prec = self.ctx.bits();
        let mut z = BigComplex::with_val(prec, t * &pair.ln_l2);
        z.exp_mut();
        z *= &frame.zeta;
        self.check_radius(&z, self.plan.delta_u)?;
        let mut pt = pair.unstable.eval_complex(&z);
        for _ in 0..frame.m {
            pt = pair.map.eval_complex(&pt);
        }
        for c in &pt {
            let r = BigReal::with_val(53, c.abs_ref()).to_f64();
            if !r.is_finite() || r > self.cfg.bound {
                return Err(Error::Convergence("unstable orbit left the bounding box".into()));
            }
        }
        Ok(pt)
    }

    fn check_radius(&self, z: &BigComplex, radius: f64) -> Result<()> {
        let r = BigReal::with_val(53, z.abs_ref()).to_f64();
        if r > radius {
            return Err(Error::Domain(format!("|z| = {r:.3e} beyond series radius {radius:.3e}")));
        }
        Ok(())
    }

    /// `det[dGamma_s/dt, Gamma_u - Gamma_s] / Omega(z_s lambda1^t)`.
    pub fn splitting_determinant(&self, pair: &ManifoldPair, frame: &HomoclinicFrame, t: &BigComplex) -> Result<BigComplex> {
        let prec = self.ctx.bits();
        let (gs, ds) = self.gamma_s(pair, frame, t)?;
        let gu = self.gamma_u(pair, frame, t)?;
        let g0 = BigComplex::with_val(prec, &gu[0] - &gs[0]);
        let g1 = BigComplex::with_val(prec, &gu[1] - &gs[1]);
        let mut det = BigComplex::with_val(prec, &ds[0] * &g1);
        det -= BigComplex::with_val(prec, &ds[1] * &g0);
        let mut z = BigComplex::with_val(prec, t * &pair.ln_l1);
        z.exp_mut();
        z *= &frame.z_s;
        let omega = pair.wronskian.eval(&z)?;
        Ok(det / omega)
    }

    fn theta_real(&self, pair: &ManifoldPair, frame: &HomoclinicFrame, t: &BigReal) -> Result<BigReal> {
        let tc = self.ctx.complex(t);
        Ok(self.splitting_determinant(pair, frame, &tc)?.real().clone())
    }

    /// Point and tangent of `s -> F^k(Phi_u(z_base lambda2^s))` for `s` in `[0, 1]`.
    fn orbit_point(&self, pair: &ManifoldPair, z_base: &BigReal, k: usize, sigma: &BigReal) -> Result<(Vec2, Vec2)> {
        let prec = self.ctx.bits();
        let mut w = BigReal::with_val(prec, sigma * &pair.ln_l2);
        w.exp_mut();
        w *= z_base;
        let (mut p, d) = pair.unstable.eval_with_derivative(&w);
        let scale = BigReal::with_val(prec, &w * &pair.ln_l2);
        let mut v = [BigReal::with_val(prec, &d[0] * &scale), BigReal::with_val(prec, &d[1] * &scale)];
        for _ in 0..k {
            let jm = pair.map.jacobian(&p);
            let mut v0 = BigReal::with_val(prec, &jm[0][0] * &v[0]);
            v0 += &jm[0][1] * &v[1];
            let mut v1 = BigReal::with_val(prec, &jm[1][0] * &v[0]);
            v1 += &jm[1][1] * &v[1];
            v = [v0, v1];
            p = pair.map.eval(&p);
        }
        Ok((p, v))
    }

    /// First crossing of `W^u` with the vertical section through `Phi_s(z_s)`,
    /// moving in the direction of the stable flow and inside `|y - p_y| <= y0`.
    fn find_crossing(&self, pair: &ManifoldPair, z_s: &BigReal) -> Result<Crossing> {
        let ctx = &self.ctx;
        let prec = ctx.bits();
        let anchor = pair.stable.eval(z_s);
        let y0 = section_halfwidth(&anchor, &pair.saddle.point);
        let step = pair.map.eval(&anchor);
        let dir = BigReal::with_val(prec, &step[0] - &anchor[0]);
        let forward = dir.is_sign_positive();
        let z_base = self.z_base(pair);
        let mut pt = pair.unstable.eval(&z_base);
        let rel = |p: &Vec2| BigReal::with_val(prec, &p[0] - &anchor[0]);
        for k in 0..self.plan.m0 {
            let next = pair.map.eval(&pt);
            let (a, b) = (rel(&pt), rel(&next));
            let crosses = if forward {
                a.is_sign_negative() && !b.is_sign_negative()
            } else {
                !a.is_sign_negative() && b.is_sign_negative()
            };
            if crosses {
                let sigma = self.refine_crossing(pair, &z_base, k, &anchor, &a, &b)?;
                let (point, _) = self.orbit_point(pair, &z_base, k, &sigma)?;
                let dy = BigReal::with_val(prec, &point[1] - &anchor[1]).abs();
                if dy <= y0 {
                    return Ok(Crossing { k, sigma, point, anchor });
                }
            }
            if next[0].to_f64().abs() > self.cfg.bound || next[1].to_f64().abs() > self.cfg.bound || !next[0].is_finite() {
                return Err(Error::Convergence("unstable manifold escaped before reaching the section".into()));
            }
            pt = next;
        }
        Err(Error::Convergence(format!(
            "no section crossing within {} iterations",
            self.plan.m0
        )))
    }

    /// Safeguarded Newton for `x(s) = p_x` with `s` in `[k, k + 1]`.
    fn refine_crossing(&self, pair: &ManifoldPair, z_base: &BigReal, k: usize, anchor: &Vec2, fa: &BigReal, fb: &BigReal) -> Result<BigReal> {
        let ctx = &self.ctx;
        let prec = ctx.bits();
        let (mut lo, mut hi) = (ctx.real(0), ctx.real(1));
        let lo_neg = fa.is_sign_negative();
        // secant guess from the endpoint values
        let mut s = BigReal::with_val(prec, fa / BigReal::with_val(prec, fa - fb));
        if !(s > 0u32 && s < 1u32) {
            s = ctx.real(0.5);
        }
        let tol = ctx.pow10(-(ctx.total() as i32 - 4));
        for _ in 0..self.cfg.max_newton {
            let (p, v) = self.orbit_point(pair, z_base, k, &s)?;
            let f = BigReal::with_val(prec, &p[0] - &anchor[0]);
            if f.is_zero() {
                return Ok(s);
            }
            if f.is_sign_negative() == lo_neg {
                lo = s.clone();
            } else {
                hi = s.clone();
            }
            let mut next = if v[0].is_zero() { None } else { Some(BigReal::with_val(prec, &s - BigReal::with_val(prec, &f / &v[0]))) };
            if let Some(n) = &next {
                if !(*n > lo && *n < hi) {
                    next = None;
                }
            }
            let n = next.unwrap_or_else(|| BigReal::with_val(prec, &lo + &hi) / 2u32);
            let delta = BigReal::with_val(prec, &n - &s).abs();
            s = n;
            if delta <= tol {
                return Ok(s);
            }
        }
        Err(Error::Convergence("Newton iteration for the section crossing did not converge".into()))
    }

    /// Signed gap `y = q_y - p_y` of the first crossing at `slave`.
    pub fn section_gap(&self, slave: &BigReal) -> Result<(BigReal, ManifoldPair)> {
        let pair = self.pair(slave)?;
        let c = self.find_crossing(&pair, &self.z_s())?;
        let gap = BigReal::with_val(self.ctx.bits(), &c.point[1] - &c.anchor[1]);
        Ok((gap, pair))
    }

    /// Secant iteration on the slave parameter until the section gap vanishes
    /// (`relax = None`) or until the step falls below `relax`.
    pub fn find_primary_homoclinic(&self, seed_slave: &BigReal, relax: Option<&BigReal>) -> Result<HomoclinicFrame> {
        let ctx = &self.ctx;
        let prec = ctx.bits();
        let scale = BigReal::with_val(prec, seed_slave.abs_ref()).max(&BigReal::with_val(prec, self.main.abs_ref()));
        let scale = if self.family == MapFamily::Henon { ctx.real(1) } else { scale };
        let dbar = ctx.pow10(-(ctx.digits() as i32) / 3) * &scale;
        let floor = ctx.pow10(-(ctx.total() as i32 - 6)) * &scale;
        let mut nu = ctx.adopt(seed_slave);
        let mut steps = Vec::new();
        let mut last_step: Option<BigReal> = None;
        for _ in 0..self.cfg.max_secant {
            let (y, _) = self.section_gap(&nu)?;
            steps.push(SecantStep { slave: nu.clone(), gap: y.clone() });
            if y.is_zero() {
                return self.frame_at(&nu, steps);
            }
            let nu_d = BigReal::with_val(prec, &nu + &dbar);
            let (yd, _) = self.section_gap(&nu_d)?;
            let dy = BigReal::with_val(prec, &yd - &y);
            if dy.is_zero() {
                return Err(Error::Conditioning("section gap does not depend on the slave parameter".into()));
            }
            let step = BigReal::with_val(prec, &dbar * &y) / &dy;
            let size = BigReal::with_val(prec, step.abs_ref());
            if let Some(r) = relax {
                if size <= *r {
                    return self.frame_at(&nu, steps);
                }
            }
            let stalled = last_step.as_ref().is_some_and(|l| size >= *l && size <= BigReal::with_val(prec, &floor * 1000u32));
            nu -= &step;
            if size <= floor || stalled {
                let (y, _) = self.section_gap(&nu)?;
                steps.push(SecantStep { slave: nu.clone(), gap: y });
                return self.frame_at(&nu, steps);
            }
            last_step = Some(size);
        }
        Err(Error::Convergence(format!(
            "secant iteration did not converge in {} steps",
            self.cfg.max_secant
        )))
    }

    fn frame_at(&self, nu: &BigReal, steps: Vec<SecantStep>) -> Result<HomoclinicFrame> {
        let prec = self.ctx.bits();
        let pair = self.pair(nu)?;
        let z_s = self.z_s();
        let c = self.find_crossing(&pair, &z_s)?;
        let mut zeta = BigReal::with_val(prec, &c.sigma * &pair.ln_l2);
        zeta.exp_mut();
        zeta *= self.z_base(&pair);
        let mut z_u = zeta.clone();
        for _ in 0..c.k {
            z_u *= &pair.saddle.lambda2;
        }
        let gap = BigReal::with_val(prec, &c.point[1] - &c.anchor[1]);
        let y0 = section_halfwidth(&c.anchor, &pair.saddle.point);
        Ok(HomoclinicFrame { z_s, zeta, m: c.k, z_u, slave: nu.clone(), y0, gap, steps })
    }

    /// Four-point real harmonics at `pair`'s slave value.
    pub fn harmonics_real(&self, pair: &ManifoldPair, frame: &HomoclinicFrame) -> Result<Harmonics> {
        let ctx = &self.ctx;
        let th = |t: f64| self.theta_real(pair, frame, &ctx.real(t));
        let (t0, tq, th_, tmq) = (th(0.0)?, th(0.25)?, th(0.5)?, th(-0.25)?);
        Ok(real_harmonics_from_samples(ctx, &t0, &tq, &th_, &tmq))
    }

    /// `C_{-1}` from samples on the line `Im t = delta`.
    pub fn harmonic_complex(&self, pair: &ManifoldPair, frame: &HomoclinicFrame, delta: &BigReal) -> Result<Harmonics> {
        let ctx = &self.ctx;
        let prec = ctx.bits();
        let rho = self.strip_halfwidth(pair);
        if *delta >= rho || !delta.is_sign_positive() {
            return Err(Error::Domain(format!(
                "strip offset {:.4} outside (0, rho = {:.4})",
                delta.to_f64(),
                rho.to_f64()
            )));
        }
        let at = |re: f64| -> Result<BigComplex> {
            let t = BigComplex::with_val(prec, (ctx.real(re), delta));
            self.splitting_determinant(pair, frame, &t)
        };
        let four_point = *delta <= BigReal::with_val(prec, &rho / 3u32);
        let damp = (BigReal::with_val(prec, delta * &ctx.pi()) * -2i32).exp();
        let cm1 = if four_point {
            let (a, b, c, d) = (at(0.0)?, at(0.25)?, at(0.5)?, at(0.75)?);
            let mut s = BigComplex::with_val(prec, &a - &c);
            let bd = BigComplex::with_val(prec, &b - &d);
            s += bd * BigComplex::with_val(prec, (0, 1));
            s * damp / 4u32
        } else {
            let (a, c) = (at(0.0)?, at(0.5)?);
            BigComplex::with_val(prec, &a - &c) * damp / 2u32
        };
        Ok(Harmonics::Complex { cm1, delta: delta.clone(), four_point })
    }

    /// Finite-difference slope of `Theta(t)` in the slave parameter around `nu`,
    /// plus its relative spread over `t in {0, 1/4, 1/2}`.
    fn slope(&self, frame: &HomoclinicFrame, nu: &BigReal, h: &BigReal) -> Result<(BigReal, f64)> {
        let prec = self.ctx.bits();
        let p3 = self.pair(&BigReal::with_val(prec, nu + h))?;
        let p4 = self.pair(&BigReal::with_val(prec, nu - h))?;
        let two_h = BigReal::with_val(prec, h * 2u32);
        let mut slopes = Vec::new();
        for t in [0.0, 0.25, 0.5] {
            let t = self.ctx.real(t);
            let d = self.theta_real(&p3, frame, &t)? - self.theta_real(&p4, frame, &t)?;
            slopes.push(d / &two_h);
        }
        let s0 = slopes[0].clone();
        if s0.is_zero() {
            return Err(Error::Conditioning("splitting determinant does not move with the slave parameter".into()));
        }
        let spread = slopes
            .iter()
            .map(|s| (BigReal::with_val(prec, s - &s0) / &s0).abs().to_f64())
            .fold(0.0, f64::max);
        Ok((s0, spread))
    }

    fn fd_step(&self, z_est: &BigReal) -> BigReal {
        let floor = self.ctx.pow10(-(self.ctx.digits() as i32) / 4);
        let big = BigReal::with_val(self.ctx.bits(), z_est * 1000u32);
        if big > floor {
            big
        } else {
            floor
        }
    }

    /// `4 |H| / |slope|` with the slope measured around `nu`, after sizing the step.
    fn width_from_harmonic(&self, frame: &HomoclinicFrame, nu: &BigReal, first: &BigComplex) -> Result<(BigReal, BigReal, f64)> {
        let prec = self.ctx.bits();
        let amp = BigReal::with_val(prec, first.abs_ref()) * 4u32;
        let h0 = self.fd_step(&self.ctx.real(0));
        let (s0, _) = self.slope(frame, nu, &h0)?;
        let z0 = BigReal::with_val(prec, &amp / &s0).abs();
        let h = self.fd_step(&z0);
        let (slope, spread) = if h > h0 { self.slope(frame, nu, &h)? } else { self.slope(frame, nu, &h0)? };
        if spread > self.cfg.slope_spread_guard {
            return Err(Error::Conditioning(format!(
                "slope of the splitting determinant varies by {spread:.3} over one period"
            )));
        }
        let z = BigReal::with_val(prec, &amp / &slope).abs();
        Ok((z, slope, spread))
    }

    /// Real-approach width `4 |R_{-1}| / |dTheta/dnu|`.
    pub fn width_real(&self, frame: &HomoclinicFrame) -> Result<WidthEstimate> {
        let prec = self.ctx.bits();
        let pair = self.pair(&frame.slave)?;
        let h = self.harmonics_real(&pair, frame)?;
        let Harmonics::Real { r0, rm1, .. } = &h else { unreachable!() };
        let (mut z, mut slope, mut spread) = self.width_from_harmonic(frame, &frame.slave, rm1)?;
        let mut anchor = frame.slave.clone();
        let mut harmonics = h.clone();
        if self.cfg.center_anchor {
            // zone centre: R_0 = 0
            anchor = BigReal::with_val(prec, &frame.slave - BigReal::with_val(prec, r0 / &slope));
            let pc = self.pair(&anchor)?;
            harmonics = self.harmonics_real(&pc, frame)?;
            let (zc, sc, spc) = self.width_from_harmonic(frame, &anchor, harmonics.first())?;
            z = zc;
            slope = sc;
            spread = spc;
        }
        Ok(WidthEstimate {
            error_exponent: log10_abs(&z),
            value: z,
            method: WidthMethod::Real,
            anchor,
            harmonics,
            slope,
            slope_spread: spread,
            frame: frame.clone(),
            log10_strip_gain: 0.0,
        })
    }

    /// Complex-approach width from `C_{-1}` on the line `Im t = delta`, with the
    /// frame located only to within `Delta_0 = K e^(2 pi delta)`.
    pub fn width_complex(&self, seed_slave: &BigReal, delta: &BigReal) -> Result<WidthEstimate> {
        let prec = self.ctx.bits();
        let k = self.family.leading_width(&self.main)?;
        let gain = (BigReal::with_val(prec, delta * &self.ctx.pi()) * 2u32).exp();
        let delta0 = BigReal::with_val(prec, &k * &gain);
        let frame = self.find_primary_homoclinic(seed_slave, Some(&delta0))?;
        let pair = self.pair(&frame.slave)?;
        let h = self.harmonic_complex(&pair, &frame, delta)?;
        let (z, slope, spread) = self.width_from_harmonic(&frame, &frame.slave, h.first())?;
        let c_gain = BigComplex::with_val(prec, h.first() * &gain);
        Ok(WidthEstimate {
            error_exponent: log10_abs_complex(&c_gain),
            value: z,
            method: WidthMethod::Complex,
            anchor: frame.slave.clone(),
            harmonics: h,
            slope,
            slope_spread: spread,
            frame,
            log10_strip_gain: log10_abs(&gain),
        })
    }

    /// Default strip offset `delta = rho / 2` at the given slave value.
    pub fn default_delta(&self, slave: &BigReal) -> Result<BigReal> {
        let pair = self.pair(slave)?;
        Ok(self.strip_halfwidth(&pair) / 2u32)
    }

    /// Solves `R_0 -+ 2 |R_{-1}| = 0` with the frame fixed; returns `(upper, lower)`.
    pub fn tangency_parameters(&self, frame: &HomoclinicFrame, est: &WidthEstimate) -> Result<(BigReal, BigReal)> {
        let prec = self.ctx.bits();
        let eq = |nu: &BigReal, sign: i32| -> Result<BigReal> {
            let pair = self.pair(nu)?;
            let Harmonics::Real { r0, rm1, .. } = self.harmonics_real(&pair, frame)? else { unreachable!() };
            let amp = BigReal::with_val(prec, rm1.abs_ref()) * 2u32;
            Ok(if sign > 0 { r0 - amp } else { r0 + amp })
        };
        let half = BigReal::with_val(prec, &est.value / 2u32);
        let tol = BigReal::with_val(prec, &est.value * self.ctx.pow10(-(self.ctx.total() as i32) + log10_abs(&est.value).abs() as i32 + 8));
        let mut out = Vec::new();
        for sign in [1, -1] {
            // R_0 grows like slope * (nu - centre); the root sits half a width away.
            let dir = if est.slope.is_sign_positive() == (sign > 0) { 1 } else { -1 };
            let mut a = BigReal::with_val(prec, &est.anchor + BigReal::with_val(prec, &half * dir));
            let mut b = BigReal::with_val(prec, &a + BigReal::with_val(prec, &half * dir) / 8u32);
            let mut fa = eq(&a, sign)?;
            let mut fb = eq(&b, sign)?;
            let mut done = false;
            for _ in 0..self.cfg.max_secant {
                let den = BigReal::with_val(prec, &fb - &fa);
                if den.is_zero() {
                    break;
                }
                let c = BigReal::with_val(prec, &b - BigReal::with_val(prec, &fb * BigReal::with_val(prec, &b - &a)) / &den);
                let step = BigReal::with_val(prec, &c - &b).abs();
                a = b;
                fa = fb;
                b = c;
                if step <= tol {
                    done = true;
                    break;
                }
                fb = eq(&b, sign)?;
            }
            if !done {
                return Err(Error::Convergence("tangency equation did not converge".into()));
            }
            out.push(b);
        }
        let (up, low) = (out[0].clone(), out[1].clone());
        if up <= low {
            return Err(Error::Conditioning("tangency parameters are not ordered; R_0 is not monotone".into()));
        }
        Ok((up, low))
    }
}

fn section_halfwidth(anchor: &Vec2, saddle: &Vec2) -> BigReal {
    let prec = anchor[0].prec();
    let dx = BigReal::with_val(prec, &anchor[0] - &saddle[0]);
    let dy = BigReal::with_val(prec, &anchor[1] - &saddle[1]);
    dx.hypot(&dy)
}

/// `R_0 = (T(0) + T(1/2)) / 2`, `R_{-1} = ((T(0) - T(1/2)) + i (T(1/4) - T(-1/4))) / 4`.
pub fn real_harmonics_from_samples(ctx: &Precision, t0: &BigReal, tq: &BigReal, th: &BigReal, tmq: &BigReal) -> Harmonics {
    let prec = ctx.bits();
    let r0 = BigReal::with_val(prec, t0 + th) / 2u32;
    let re = BigReal::with_val(prec, t0 - th) / 4u32;
    let im = BigReal::with_val(prec, tq - tmq) / 4u32;
    let rm1 = BigComplex::with_val(prec, (&re, &im));
    let rp1 = BigComplex::with_val(prec, (&re, -im));
    Harmonics::Real { r0, rm1, rp1 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples_alias_to_r0() {
        let c = Precision::with_digits(40).unwrap();
        let v = c.parse("1.25").unwrap();
        let Harmonics::Real { r0, rm1, rp1 } = real_harmonics_from_samples(&c, &v, &v, &v, &v) else { panic!() };
        assert_eq!(r0, v);
        assert!(rm1.real().is_zero() && rm1.imag().is_zero());
        assert!(rp1.real().is_zero() && rp1.imag().is_zero());
    }

    #[test]
    fn conjugate_pair() {
        let c = Precision::with_digits(40).unwrap();
        let s: Vec<BigReal> = ["0.3", "-1.7", "2.2", "0.01"].iter().map(|t| c.parse(t).unwrap()).collect();
        let Harmonics::Real { rm1, rp1, .. } = real_harmonics_from_samples(&c, &s[0], &s[1], &s[2], &s[3]) else { panic!() };
        assert_eq!(rp1, rm1.conj());
    }
}
