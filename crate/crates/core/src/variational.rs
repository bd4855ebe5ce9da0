//! Jacobian determinant along the stable manifold, `J(z) = det dF(Phi_s(z))`,
//! and the Wronskian `Omega` solving `Omega(lambda1 z) = J(z) Omega(z)`.

use crate::error::{Error, Result};
use crate::manifolds::ManifoldSeries;
use crate::maps::QuadraticMap;
use crate::numerics::{complex_power, log10_abs, BigComplex, BigReal, Precision};

#[derive(Clone, Debug)]
pub struct JacobianSeries {
    pub coeffs: Vec<BigReal>,
}

/// `Omega(z) = z^c (1 + sum_{k>=1} coeffs[k] z^k)` with `coeffs[0] = 1`.
#[derive(Clone, Debug)]
pub struct WronskianSeries {
    pub exponent: BigReal,
    pub coeffs: Vec<BigReal>,
}

fn is_constant(a: &[BigReal]) -> bool {
    a.iter().skip(1).all(|c| c.is_zero())
}

/// Truncated Cauchy product.
fn series_mul(a: &[BigReal], b: &[BigReal], n: usize, prec: u32) -> Vec<BigReal> {
    if is_constant(a) {
        return (0..=n).map(|k| BigReal::with_val(prec, &b[k] * &a[0])).collect();
    }
    if is_constant(b) {
        return series_mul(b, a, n, prec);
    }
    (0..=n)
        .map(|k| {
            let mut s = BigReal::new(prec);
            for j in 0..=k {
                s += &a[j] * &b[k - j];
            }
            s
        })
        .collect()
}

/// Determinant of `dF` composed with the stable series.
pub fn jacobian_along_stable(map: &QuadraticMap, stable: &ManifoldSeries, ctx: &Precision) -> JacobianSeries {
    let prec = ctx.bits();
    let n = stable.order();
    let mut m: [[Vec<BigReal>; 2]; 2] = Default::default();
    let j0 = map.jacobian(stable.base());
    for (k, v) in stable.coeffs.iter().enumerate() {
        let entries = if k == 0 { j0.clone() } else { map.jacobian_increment(v) };
        for i in 0..2 {
            for j in 0..2 {
                m[i][j].push(BigReal::with_val(prec, &entries[i][j]));
            }
        }
    }
    let d1 = series_mul(&m[0][0], &m[1][1], n, prec);
    let d2 = series_mul(&m[0][1], &m[1][0], n, prec);
    let coeffs = d1.into_iter().zip(d2).map(|(a, b)| a - b).collect();
    JacobianSeries { coeffs }
}

impl JacobianSeries {
    pub fn eval(&self, z: &BigComplex) -> BigComplex {
        let mut out = BigComplex::new(z.prec());
        for c in self.coeffs.iter().rev() {
            out *= z;
            out += c;
        }
        out
    }
}

/// Order-by-order solution `Omega_n = sum_{j<n} J_{n-j} Omega_j / (J_0 (lambda1^n - 1))`.
pub fn wronskian_series(j: &JacobianSeries, lambda1: &BigReal, ctx: &Precision) -> Result<WronskianSeries> {
    let prec = ctx.bits();
    let j0 = &j.coeffs[0];
    if !j0.is_sign_positive() || j0.is_zero() {
        return Err(Error::Domain("Jacobian determinant at the saddle must be positive".into()));
    }
    let exponent = BigReal::with_val(prec, j0.ln_ref()) / BigReal::with_val(prec, lambda1.ln_ref());
    let tol = ctx.pow10(-(ctx.digits() as i32) / 2);
    let n = j.coeffs.len() - 1;
    let mut coeffs = vec![BigReal::with_val(prec, 1)];
    let mut ln = BigReal::with_val(prec, 1);
    for k in 1..=n {
        ln *= lambda1;
        let mut den = BigReal::with_val(prec, &ln - 1u32);
        if BigReal::with_val(prec, den.abs_ref()) < tol {
            return Err(Error::Degenerate(format!("resonant Wronskian denominator at order {k}")));
        }
        den *= j0;
        let mut s = BigReal::new(prec);
        for (i, w) in coeffs.iter().enumerate() {
            s += &j.coeffs[k - i] * w;
        }
        coeffs.push(s / &den);
    }
    Ok(WronskianSeries { exponent, coeffs })
}

impl WronskianSeries {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Geometric mean of `|Omega_k|^(-1/k)` over `window`. Zeros of `J` are
    /// poles of `Omega`, so this can be smaller than the manifold's radius.
    pub fn radius_estimate(&self, window: std::ops::RangeInclusive<usize>) -> f64 {
        let logs: Vec<f64> = window
            .filter(|&k| k > 0 && k <= self.order())
            .filter_map(|k| {
                let l = log10_abs(&self.coeffs[k]);
                l.is_finite().then_some(-l / k as f64)
            })
            .collect();
        if logs.is_empty() {
            f64::INFINITY
        } else {
            10f64.powf(logs.iter().sum::<f64>() / logs.len() as f64)
        }
    }

    /// Principal-branch evaluation; errors on the negative real axis.
    pub fn eval(&self, z: &BigComplex) -> Result<BigComplex> {
        let pre = complex_power(z, &self.exponent)?;
        let mut s = BigComplex::new(z.prec());
        for c in self.coeffs.iter().rev() {
            s *= z;
            s += c;
        }
        Ok(pre * s)
    }

    /// `|Omega(lambda1 z) - J(z) Omega(z)| / |Omega(z)|`.
    pub fn residual(&self, j: &JacobianSeries, lambda1: &BigReal, z: &BigComplex) -> Result<BigReal> {
        let prec = z.prec();
        let lz = BigComplex::with_val(prec, z * lambda1);
        let lhs = self.eval(&lz)?;
        let om = self.eval(z)?;
        let rhs = BigComplex::with_val(prec, &om * &j.eval(z));
        let d = BigComplex::with_val(prec, &lhs - &rhs);
        Ok(BigReal::with_val(prec.0, d.abs_ref()) / BigReal::with_val(prec.0, om.abs_ref()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::{compute_series, Branch};
    use crate::maps::{det2, MapFamily, ParamPoint};

    #[test]
    fn quadratic_closed_form() {
        let c = Precision::with_digits(50).unwrap();
        let gamma = c.real(-3);
        let fam = MapFamily::Quadratic { gamma: gamma.clone() };
        let p = ParamPoint::new(c.parse("0.0016").unwrap(), c.parse("-0.1").unwrap());
        let s = compute_series(&fam, &p, Branch::Stable, 15, &c).unwrap();
        let j = jacobian_along_stable(&fam.quadratic_form(&p), &s, &c);
        for k in 1..=15 {
            let want = (gamma.clone() - 2u32) * &s.coeffs[k][0] - gamma.clone() * &s.coeffs[k][1];
            let rel = ((j.coeffs[k].clone() - &want) / &want).abs().to_f64();
            assert!(rel < 1e-70, "order {k}: {rel}");
        }
        let j0 = c.parse("0.9").unwrap() - c.real(5) * c.parse("0.04").unwrap();
        assert!((j.coeffs[0].clone() - j0).abs().to_f64() < 1e-70);
    }

    #[test]
    fn henon_constant_jacobian() {
        let c = Precision::with_digits(50).unwrap();
        let p = ParamPoint::new(c.parse("0.99").unwrap(), c.parse("1.001").unwrap());
        let s = compute_series(&MapFamily::Henon, &p, Branch::Stable, 12, &c).unwrap();
        let map = MapFamily::Henon.quadratic_form(&p);
        let j = jacobian_along_stable(&map, &s, &c);
        assert_eq!(j.coeffs[0], p.slave);
        assert!(j.coeffs[1..].iter().all(|x| x.is_zero()));
        let w = wronskian_series(&j, &s.lambda, &c).unwrap();
        assert!(w.coeffs[1..].iter().all(|x| x.is_zero()));
    }

    #[test]
    fn order_one_wronskian() {
        let c = Precision::with_digits(50).unwrap();
        let fam = MapFamily::Bogdanov { gamma: c.real(3) };
        let p = ParamPoint::new(c.parse("0.01").unwrap(), c.parse("0.02").unwrap());
        let s = compute_series(&fam, &p, Branch::Stable, 10, &c).unwrap();
        let map = fam.quadratic_form(&p);
        let j = jacobian_along_stable(&map, &s, &c);
        let w = wronskian_series(&j, &s.lambda, &c).unwrap();
        let want = j.coeffs[1].clone() / (j.coeffs[0].clone() * (s.lambda.clone() - 1u32));
        assert!((w.coeffs[1].clone() - want).abs().to_f64() < 1e-70);
        // pointwise determinant oracle
        let z = c.parse("0.003").unwrap();
        let jz = j.eval(&c.complex(&z));
        let dz = det2(&map.jacobian(&s.eval(&z)));
        assert!((jz.real().clone() - dz).abs().to_f64() < 1e-40);
    }
}
