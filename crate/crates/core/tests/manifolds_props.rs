use btzone::manifolds::{compute_series, Branch};
use btzone::maps::{det2, MapFamily, ParamPoint};
use btzone::numerics::{log10_abs, BigComplex, BigReal, Precision};
use btzone::variational::{jacobian_along_stable, wronskian_series};
use proptest::prelude::*;

const ORDER: usize = 16;

fn ctx() -> Precision {
    Precision::with_digits(80).unwrap()
}

fn setup(kind: usize, gamma: f64, main: f64, c: &Precision) -> (MapFamily, ParamPoint) {
    match kind {
        0 => {
            let f = MapFamily::Quadratic { gamma: c.real(gamma) };
            let m = c.real(main);
            let s = f.predicted_homoclinic_slave(&m);
            (f, ParamPoint::new(m, s))
        }
        1 => {
            let f = MapFamily::Bogdanov { gamma: c.real(gamma) };
            let m = c.real(main);
            let s = f.predicted_homoclinic_slave(&m);
            (f, ParamPoint::new(m, s))
        }
        _ => (MapFamily::Henon, ParamPoint::new(c.real(1.0 - main), c.real(1))),
    }
}

/// Least-squares slope of `log10 r(z)` against `log10 z`.
fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `log10` of the largest value of `f` on 16 points of `|z| = r`, off the
/// negative real axis. Unlike samples on the real axis this is log-convex in
/// `log r`, so its slope is bounded below by the order of the zero at 0.
fn circle_max(r: f64, c: &Precision, f: impl Fn(&BigComplex) -> BigReal) -> f64 {
    (0..16)
        .map(|k| {
            let th = std::f64::consts::PI * (2 * k + 1) as f64 / 16.0 - std::f64::consts::PI;
            let z = BigComplex::with_val(c.bits(), (c.real(r * th.cos()), c.real(r * th.sin())));
            log10_abs(&f(&z))
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Eight points spaced logarithmically over `[lo, hi]`.
fn zs(lo: f64, hi: f64) -> Vec<f64> {
    (0..8).map(|i| lo * (hi / lo).powf(i as f64 / 7.0)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn conjugacy_residual_has_truncation_slope(kind in 0usize..3, gamma in -4.0f64..4.0, main in 1e-3f64..0.03) {
        let c = ctx();
        let (fam, p) = setup(kind, gamma, main, &c);
        // the invariants are stated for an orientation-preserving saddle
        prop_assume!(fam.saddle(&p, &c).is_ok());
        let map = fam.quadratic_form(&p);
        for branch in [Branch::Stable, Branch::Unstable] {
            let s = compute_series(&fam, &p, branch, ORDER, &c).unwrap();
            let d = s.radius_estimate(ORDER / 2..=ORDER) / 2.0;
            let pts: Vec<(f64, f64)> = zs(d / 8.0, d)
                .into_iter()
                .map(|z| (z.log10(), log10_abs(&s.conjugacy_residual(&map, &c.real(z)))))
                .collect();
            prop_assert!(pts.iter().all(|p| p.1 > -f64::from(c.total()) + 10.0), "{:?}", pts);
            let k = slope(&pts);
            prop_assert!(k >= (ORDER - 1) as f64, "{:?}: slope {}", branch, k);
        }
    }

    #[test]
    fn wronskian_equation_residual_has_truncation_slope(kind in 0usize..2, gamma in -4.0f64..4.0, main in 1e-3f64..0.03) {
        let c = ctx();
        let (fam, p) = setup(kind, gamma, main, &c);
        // the invariants are stated for an orientation-preserving saddle
        prop_assume!(fam.saddle(&p, &c).is_ok());
        let map = fam.quadratic_form(&p);
        let s = compute_series(&fam, &p, Branch::Stable, ORDER, &c).unwrap();
        let j = jacobian_along_stable(&map, &s, &c);
        let w = wronskian_series(&j, &s.lambda, &c).unwrap();
        let sad = fam.saddle(&p, &c).unwrap();
        let j0 = sad.lambda1.clone() * &sad.lambda2;
        prop_assert!(log10_abs(&(j.coeffs[0].clone() - j0)) < -(f64::from(c.digits()) - 5.0));
        let d = s.radius_estimate(ORDER / 2..=ORDER) / 2.0;
        let dw = d.min(w.radius_estimate(ORDER / 2..=ORDER) / 2.0);
        let pts: Vec<(f64, f64)> = zs(dw / 8.0, dw / 2.0)
            .into_iter()
            .map(|r| (r.log10(), circle_max(r, &c, |z| w.residual(&j, &s.lambda, z).unwrap())))
            .collect();
        // constant Jacobian determinant: the series is exact
        let floor = -f64::from(c.total()) + 10.0;
        if pts.iter().all(|p| p.1 < floor) {
            return Ok(());
        }
        let k = slope(&pts);
        prop_assert!(k >= (ORDER - 1) as f64, "slope {}", k);
    }

    #[test]
    fn determinant_transport(kind in 0usize..3, gamma in -4.0f64..4.0, main in 1e-3f64..0.03, t in 0.05f64..0.5) {
        let c = ctx();
        let (fam, p) = setup(kind, gamma, main, &c);
        // the invariants are stated for an orientation-preserving saddle
        prop_assume!(fam.saddle(&p, &c).is_ok());
        let map = fam.quadratic_form(&p);
        let s = compute_series(&fam, &p, Branch::Stable, ORDER, &c).unwrap();
        let z = c.real(t * s.radius_estimate(ORDER / 2..=ORDER));
        let direct = det2(&fam.jacobian_matrix(&p, &s.eval(&z)));
        let j = jacobian_along_stable(&map, &s, &c);
        let via = j.eval(&BigComplex::with_val(c.bits(), &z));
        let d = via.real().clone() - direct;
        prop_assert!(log10_abs(&d) < -(f64::from(c.digits()) - 5.0));
    }
}
