//! The three planar map families, their saddles and the leading width `K`.

use crate::error::{Error, Result};
use crate::numerics::{BigComplex, BigReal, Precision};
use std::fmt;

/// A map family with its fixed shape parameter.
#[derive(Clone, Debug, PartialEq)]
pub enum MapFamily {
    /// `(x, y) -> (x + y, y + x^2 - mu + gamma x y + nu y)`
    Quadratic { gamma: BigReal },
    /// `(x, y) -> (x + y + g, y + g)` with `g = x^2 + gamma x y + a x + b y`
    Bogdanov { gamma: BigReal },
    /// `(u, v) -> (v, a v^2 - b u + 1)`
    Henon,
}

/// Main and slave parameter values (`mu, nu`, `a, b` or `a~, b~`).
#[derive(Clone, Debug, PartialEq)]
pub struct ParamPoint {
    pub main: BigReal,
    pub slave: BigReal,
}

impl ParamPoint {
    pub fn new(main: BigReal, slave: BigReal) -> Self {
        Self { main, slave }
    }
}

/// Parameters of the canonical unfolding `y1 = y + x^2 - mu + gamma x y + nu y + ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm {
    pub mu: BigReal,
    pub nu: BigReal,
    pub gamma: BigReal,
}

pub type Vec2 = [BigReal; 2];
pub type Mat2 = [[BigReal; 2]; 2];

/// `F_i(p) = c_i + l_i . p + q_i0 x^2 + q_i1 x y + q_i2 y^2`.
///
/// All three families are quadratic, which keeps the manifold and Jacobian
/// recurrences exact.
#[derive(Clone, Debug)]
pub struct QuadraticMap {
    pub c: [BigReal; 2],
    pub l: Mat2,
    pub q: [[BigReal; 3]; 2],
}

impl QuadraticMap {
    pub fn eval(&self, p: &Vec2) -> Vec2 {
        let prec = p[0].prec();
        let xx = BigReal::with_val(prec, p[0].square_ref());
        let xy = BigReal::with_val(prec, &p[0] * &p[1]);
        let yy = BigReal::with_val(prec, p[1].square_ref());
        let comp = |i: usize| {
            let mut r = self.c[i].clone();
            r += &self.l[i][0] * &p[0];
            r += &self.l[i][1] * &p[1];
            r += &self.q[i][0] * &xx;
            r += &self.q[i][1] * &xy;
            r += &self.q[i][2] * &yy;
            r
        };
        [comp(0), comp(1)]
    }

    pub fn eval_complex(&self, p: &[BigComplex; 2]) -> [BigComplex; 2] {
        let prec = p[0].prec();
        let xx = BigComplex::with_val(prec, p[0].square_ref());
        let xy = BigComplex::with_val(prec, &p[0] * &p[1]);
        let yy = BigComplex::with_val(prec, p[1].square_ref());
        let comp = |i: usize| {
            let mut r = BigComplex::with_val(prec, &self.c[i]);
            r += BigComplex::with_val(prec, &p[0] * &self.l[i][0]);
            r += BigComplex::with_val(prec, &p[1] * &self.l[i][1]);
            for (term, q) in [(&xx, &self.q[i][0]), (&xy, &self.q[i][1]), (&yy, &self.q[i][2])] {
                if !q.is_zero() {
                    r += BigComplex::with_val(prec, term * q);
                }
            }
            r
        };
        [comp(0), comp(1)]
    }

    pub fn jacobian(&self, p: &Vec2) -> Mat2 {
        let row = |i: usize| {
            let mut dx = self.l[i][0].clone();
            dx += BigReal::with_val(p[0].prec(), &self.q[i][0] * &p[0]) * 2u32;
            dx += &self.q[i][1] * &p[1];
            let mut dy = self.l[i][1].clone();
            dy += &self.q[i][1] * &p[0];
            dy += BigReal::with_val(p[1].prec(), &self.q[i][2] * &p[1]) * 2u32;
            [dx, dy]
        };
        [row(0), row(1)]
    }

    /// Derivative of the Jacobian along a displacement `w`: the linear part of
    /// `jacobian(p + w) - jacobian(p)`.
    pub fn jacobian_increment(&self, w: &Vec2) -> Mat2 {
        self.jacobian_increment_with(|i, j| self.q[i][j].clone(), w)
    }

    fn jacobian_increment_with(&self, q: impl Fn(usize, usize) -> BigReal, w: &Vec2) -> Mat2 {
        let row = |i: usize| {
            let mut dx = q(i, 0) * &w[0];
            dx *= 2u32;
            dx += q(i, 1) * &w[1];
            let mut dy = q(i, 1) * &w[0];
            let mut t = q(i, 2) * &w[1];
            t *= 2u32;
            dy += t;
            [dx, dy]
        };
        [row(0), row(1)]
    }
}

pub fn det2(m: &Mat2) -> BigReal {
    let prec = m[0][0].prec();
    let mut d = BigReal::with_val(prec, &m[0][0] * &m[1][1]);
    d -= &m[0][1] * &m[1][0];
    d
}

/// Hyperbolic fixed point with its eigen-data.
#[derive(Clone, Debug)]
pub struct SaddleData {
    pub point: Vec2,
    pub lambda1: BigReal,
    pub lambda2: BigReal,
    /// Unit stable eigenvector, oriented toward the companion fixed point.
    pub eigvec1: Vec2,
    /// Unit unstable eigenvector, oriented toward the companion fixed point.
    pub eigvec2: Vec2,
    pub jacobian: Mat2,
}

impl MapFamily {
    pub fn name(&self) -> &'static str {
        match self {
            MapFamily::Quadratic { .. } => "quadratic",
            MapFamily::Bogdanov { .. } => "bogdanov",
            MapFamily::Henon => "henon",
        }
    }

    pub fn from_name(name: &str, gamma: Option<BigReal>) -> Result<Self> {
        let need = |g: Option<BigReal>| {
            g.ok_or_else(|| Error::InvalidInput(format!("family {name} needs a gamma value")))
        };
        match name.to_ascii_lowercase().as_str() {
            "quadratic" => Ok(MapFamily::Quadratic { gamma: need(gamma)? }),
            "bogdanov" => Ok(MapFamily::Bogdanov { gamma: need(gamma)? }),
            "henon" => Ok(MapFamily::Henon),
            other => Err(Error::InvalidInput(format!("unknown family {other:?}"))),
        }
    }

    pub fn gamma(&self) -> Option<&BigReal> {
        match self {
            MapFamily::Quadratic { gamma } | MapFamily::Bogdanov { gamma } => Some(gamma),
            MapFamily::Henon => None,
        }
    }

    /// Same family with the shape parameter re-rounded to `ctx`.
    pub fn adopt(&self, ctx: &Precision) -> Self {
        match self {
            MapFamily::Quadratic { gamma } => MapFamily::Quadratic { gamma: ctx.adopt(gamma) },
            MapFamily::Bogdanov { gamma } => MapFamily::Bogdanov { gamma: ctx.adopt(gamma) },
            MapFamily::Henon => MapFamily::Henon,
        }
    }

    /// Coefficients of the family as a quadratic map at `p`.
    pub fn quadratic_form(&self, p: &ParamPoint) -> QuadraticMap {
        let prec = p.main.prec();
        let r = |v: i32| BigReal::with_val(prec, v);
        let zero = || r(0);
        match self {
            MapFamily::Quadratic { gamma } => QuadraticMap {
                c: [zero(), -p.main.clone()],
                l: [[r(1), r(1)], [zero(), p.slave.clone() + 1u32]],
                q: [[zero(), zero(), zero()], [r(1), BigReal::with_val(prec, gamma), zero()]],
            },
            MapFamily::Bogdanov { gamma } => {
                let g = BigReal::with_val(prec, gamma);
                let a1 = p.main.clone() + 1u32;
                let b1 = p.slave.clone() + 1u32;
                QuadraticMap {
                    c: [zero(), zero()],
                    l: [[a1, b1.clone()], [p.main.clone(), b1]],
                    q: [[r(1), g.clone(), zero()], [r(1), g, zero()]],
                }
            }
            MapFamily::Henon => QuadraticMap {
                c: [zero(), r(1)],
                l: [[zero(), r(1)], [-p.slave.clone(), zero()]],
                q: [[zero(), zero(), zero()], [zero(), zero(), p.main.clone()]],
            },
        }
    }

    pub fn eval(&self, p: &ParamPoint, pt: &Vec2) -> Vec2 {
        self.quadratic_form(p).eval(pt)
    }

    pub fn jacobian_matrix(&self, p: &ParamPoint, pt: &Vec2) -> Mat2 {
        self.quadratic_form(p).jacobian(pt)
    }

    /// Rejects main-parameter values for which the saddle does not exist.
    pub fn check_admissible(&self, main: &BigReal) -> Result<()> {
        let ok = match self {
            MapFamily::Quadratic { .. } | MapFamily::Bogdanov { .. } => main.is_sign_positive() && !main.is_zero(),
            MapFamily::Henon => *main < 1u32,
        };
        if ok && main.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "main parameter {} outside the admissible range of the {} family",
                main.to_f64(),
                self.name()
            )))
        }
    }

    fn fixed_points(&self, p: &ParamPoint) -> Result<(Vec2, Vec2)> {
        self.check_admissible(&p.main)?;
        let prec = p.main.prec();
        let zero = || BigReal::with_val(prec, 0);
        match self {
            MapFamily::Quadratic { .. } => {
                let s = p.main.clone().sqrt();
                Ok(([s.clone(), zero()], [-s, zero()]))
            }
            MapFamily::Bogdanov { .. } => Ok(([zero(), zero()], [-p.main.clone(), zero()])),
            MapFamily::Henon => {
                // a v^2 - (1 + b) v + 1 = 0
                let b1 = p.slave.clone() + 1u32;
                let mut disc = BigReal::with_val(prec, b1.square_ref());
                disc -= BigReal::with_val(prec, &p.main * 4u32);
                if disc.is_sign_negative() || disc.is_zero() {
                    return Err(Error::Degenerate("Henon map has no pair of fixed points".into()));
                }
                let root = disc.sqrt();
                let two_a = BigReal::with_val(prec, &p.main * 2u32);
                let hi = BigReal::with_val(prec, &b1 + &root) / &two_a;
                let lo = BigReal::with_val(prec, &b1 - &root) / &two_a;
                Ok(([hi.clone(), hi], [lo.clone(), lo]))
            }
        }
    }

    /// The fixed point surrounded by the homoclinic loop.
    pub fn companion_fixed_point(&self, p: &ParamPoint) -> Result<Vec2> {
        Ok(self.fixed_points(p)?.1)
    }

    pub fn saddle(&self, p: &ParamPoint, ctx: &Precision) -> Result<SaddleData> {
        let (point, companion) = self.fixed_points(p)?;
        let a = self.jacobian_matrix(p, &point);
        let prec = ctx.bits();
        let trace = BigReal::with_val(prec, &a[0][0] + &a[1][1]);
        let det = det2(&a);
        let mut disc = BigReal::with_val(prec, trace.square_ref());
        disc -= BigReal::with_val(prec, &det * 4u32);
        let tol = ctx.pow10(-(ctx.digits() as i32) / 2);
        if disc.is_sign_negative() || disc.is_zero() {
            return Err(Error::Degenerate("complex or double eigenvalues at the fixed point".into()));
        }
        let root = disc.sqrt();
        let lambda1 = BigReal::with_val(prec, &trace - &root) / 2u32;
        let lambda2 = BigReal::with_val(prec, &trace + &root) / 2u32;
        for lam in [&lambda1, &lambda2] {
            let gap = BigReal::with_val(prec, lam - 1u32).abs();
            if gap < tol {
                return Err(Error::Degenerate(format!(
                    "eigenvalue within {:.1e} of 1",
                    gap.to_f64()
                )));
            }
        }
        if !(lambda1 < 1u32 && lambda2 > 1u32 && lambda1.is_sign_positive()) {
            return Err(Error::Degenerate(format!(
                "fixed point is not a saddle with 0 < l1 < 1 < l2 (l1 = {}, l2 = {})",
                lambda1.to_f64(),
                lambda2.to_f64()
            )));
        }
        let toward = [
            BigReal::with_val(prec, &companion[0] - &point[0]),
            BigReal::with_val(prec, &companion[1] - &point[1]),
        ];
        let eigvec1 = eigenvector(&a, &lambda1, &toward);
        let eigvec2 = eigenvector(&a, &lambda2, &toward);
        Ok(SaddleData { point, lambda1, lambda2, eigvec1, eigvec2, jacobian: a })
    }

    /// Arguments `(mu_eff, gamma_eff)` of the leading width `K`.
    pub fn k_arguments(&self, main: &BigReal) -> (BigReal, BigReal) {
        let prec = main.prec();
        match self {
            MapFamily::Quadratic { gamma } => (main.clone(), BigReal::with_val(prec, gamma - 2u32)),
            MapFamily::Bogdanov { gamma } => {
                (BigReal::with_val(prec, main.square_ref()) / 4u32, BigReal::with_val(prec, gamma))
            }
            MapFamily::Henon => (BigReal::with_val(prec, 1u32 - main).abs(), BigReal::with_val(prec, 0)),
        }
    }

    pub fn leading_width(&self, main: &BigReal) -> Result<BigReal> {
        let (mu, g) = self.k_arguments(main);
        leading_width_k(&mu, &g)
    }

    /// Leading-order slave value on the homoclinic line.
    pub fn predicted_homoclinic_slave(&self, main: &BigReal) -> BigReal {
        let prec = main.prec();
        match self {
            MapFamily::Quadratic { gamma } => {
                let mut v = BigReal::with_val(prec, gamma - 2u32) * 5u32 / 7u32;
                v *= BigReal::with_val(prec, main.abs_ref()).sqrt();
                v
            }
            MapFamily::Bogdanov { gamma } => BigReal::with_val(prec, main * gamma) * 6u32 / 7u32,
            MapFamily::Henon => BigReal::with_val(prec, 1),
        }
    }

    pub fn to_normal_form(&self, p: &ParamPoint) -> NormalForm {
        let prec = p.main.prec();
        match self {
            MapFamily::Quadratic { gamma } => NormalForm {
                mu: p.main.clone(),
                nu: p.slave.clone(),
                gamma: BigReal::with_val(prec, gamma),
            },
            MapFamily::Bogdanov { gamma } => {
                let g2 = BigReal::with_val(prec, gamma + 2u32);
                let mut nu = BigReal::with_val(prec, &p.main + &p.slave);
                nu -= BigReal::with_val(prec, &g2 * &p.main) / 2u32;
                NormalForm {
                    mu: BigReal::with_val(prec, p.main.square_ref()) / 4u32,
                    nu,
                    gamma: g2,
                }
            }
            MapFamily::Henon => {
                let nu = BigReal::with_val(prec, &p.slave - 1u32);
                let mut mu = BigReal::with_val(prec, &nu / 2u32) + 1u32;
                mu.square_mut();
                mu -= &p.main;
                NormalForm { mu, nu, gamma: BigReal::with_val(prec, 2) }
            }
        }
    }

    /// Power `p` with `x = s^(1/p)`, where `s` is the scan coordinate.
    pub fn scale_power(&self) -> u32 {
        match self {
            MapFamily::Quadratic { .. } | MapFamily::Henon => 4,
            MapFamily::Bogdanov { .. } => 2,
        }
    }

    /// Scan coordinate `s` of a main value: `mu`, `a`, or `1 - a~`.
    pub fn scan_coordinate(&self, main: &BigReal) -> BigReal {
        match self {
            MapFamily::Henon => BigReal::with_val(main.prec(), 1u32 - main),
            _ => main.clone(),
        }
    }

    pub fn main_from_scan(&self, s: &BigReal) -> BigReal {
        self.scan_coordinate(s)
    }

    /// Expansion variable `x = s^(1/p)`.
    pub fn expansion_variable(&self, main: &BigReal) -> BigReal {
        let s = self.scan_coordinate(main);
        let p = self.scale_power();
        let mut x = s.abs();
        x.root_mut(p);
        x
    }

    pub fn main_from_expansion_variable(&self, x: &BigReal) -> BigReal {
        let mut s = x.clone();
        s.pow_assign_u32(self.scale_power());
        self.main_from_scan(&s)
    }
}

trait PowU32 {
    fn pow_assign_u32(&mut self, e: u32);
}

impl PowU32 for BigReal {
    fn pow_assign_u32(&mut self, e: u32) {
        use rug::ops::PowAssign;
        self.pow_assign(e);
    }
}

impl fmt::Display for MapFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.gamma() {
            Some(g) => write!(f, "{}(gamma={})", self.name(), g.to_f64()),
            None => write!(f, "{}", self.name()),
        }
    }
}

fn eigenvector(a: &Mat2, lambda: &BigReal, toward: &Vec2) -> Vec2 {
    let prec = lambda.prec();
    // (A - l) v = 0; pick the better-conditioned row.
    let r0 = BigReal::with_val(prec, &a[0][1]).abs();
    let r1 = BigReal::with_val(prec, &a[1][0]).abs();
    let mut v = if r0 >= r1 {
        [a[0][1].clone(), BigReal::with_val(prec, lambda - &a[0][0])]
    } else {
        [BigReal::with_val(prec, lambda - &a[1][1]), a[1][0].clone()]
    };
    let norm = BigReal::with_val(prec, v[0].hypot_ref(&v[1]));
    v[0] /= &norm;
    v[1] /= &norm;
    let mut dot = BigReal::with_val(prec, &v[0] * &toward[0]);
    dot += &v[1] * &toward[1];
    if dot.is_sign_negative() {
        v[0] = -v[0].clone();
        v[1] = -v[1].clone();
    }
    v
}

/// `K(mu, g) = 5 / (6 sqrt 2 mu^(5/4)) exp(-sqrt 2 pi^2 / mu^(1/4)) exp(-6 pi^2 g / 7)`.
pub fn leading_width_k(mu: &BigReal, g: &BigReal) -> Result<BigReal> {
    if !mu.is_sign_positive() || mu.is_zero() {
        return Err(Error::Domain("leading width needs a positive argument".into()));
    }
    let prec = mu.prec();
    let pi2 = BigReal::with_val(prec, rug::float::Constant::Pi).square();
    let sqrt2 = BigReal::with_val(prec, 2).sqrt();
    let mu4 = BigReal::with_val(prec, mu.root_ref(4));
    let mut pre = BigReal::with_val(prec, &mu4 * mu);
    pre *= &sqrt2;
    pre *= 6u32;
    let pre = BigReal::with_val(prec, 5) / pre;
    let mut e1 = BigReal::with_val(prec, &sqrt2 * &pi2) / &mu4;
    e1 += BigReal::with_val(prec, &pi2 * g) * 6u32 / 7u32;
    let e = (-e1).exp();
    Ok(pre * e)
}
