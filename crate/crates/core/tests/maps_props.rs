use btzone::maps::{MapFamily, ParamPoint};
use btzone::numerics::{log10_abs, BigReal, Precision};
use proptest::prelude::*;

fn ctx() -> Precision {
    Precision::with_digits(60).unwrap()
}

fn family(kind: usize, gamma: f64, c: &Precision) -> MapFamily {
    match kind {
        0 => MapFamily::Quadratic { gamma: c.real(gamma) },
        1 => MapFamily::Bogdanov { gamma: c.real(gamma) },
        _ => MapFamily::Henon,
    }
}

fn point(kind: usize, main: f64, slave: f64, c: &Precision) -> ParamPoint {
    match kind {
        // b~ >= 1 keeps both fixed points for a~ < 1
        2 => ParamPoint::new(c.real(1.0 - main), c.real(1.0 + slave.abs())),
        _ => ParamPoint::new(c.real(main), c.real(slave)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jacobian_matches_central_differences(
        kind in 0usize..3, gamma in -4.0f64..4.0, main in 1e-4f64..0.05, slave in -0.05f64..0.05,
        x in -1.0f64..1.0, y in -1.0f64..1.0,
    ) {
        let c = ctx();
        let fam = family(kind, gamma, &c);
        let p = point(kind, main, slave, &c);
        let pt = [c.real(x), c.real(y)];
        let h = c.pow10(-(c.digits() as i32) / 3);
        let j = fam.jacobian_matrix(&p, &pt);
        for col in 0..2 {
            let mut plus = pt.clone();
            let mut minus = pt.clone();
            plus[col] += &h;
            minus[col] -= &h;
            let fp = fam.eval(&p, &plus);
            let fm = fam.eval(&p, &minus);
            for row in 0..2 {
                let fd = BigReal::with_val(c.bits(), &fp[row] - &fm[row]) / BigReal::with_val(c.bits(), &h * 2u32);
                let err = fd - &j[row][col];
                prop_assert!(log10_abs(&err) < -(f64::from(c.digits()) / 2.0), "row {} col {}", row, col);
            }
        }
    }

    #[test]
    fn saddle_is_fixed(kind in 0usize..3, gamma in -4.0f64..4.0, main in 1e-4f64..0.05, slave in -0.05f64..0.05) {
        let c = ctx();
        let fam = family(kind, gamma, &c);
        let p = point(kind, main, slave, &c);
        let s = fam.saddle(&p, &c);
        // far from the BT point the fixed point can flip orientation (l1 < 0)
        prop_assume!(!matches!(s, Err(btzone::Error::Degenerate(_))));
        let s = s.unwrap();
        let img = fam.eval(&p, &s.point);
        for i in 0..2 {
            let d = BigReal::with_val(c.bits(), &img[i] - &s.point[i]);
            prop_assert!(log10_abs(&d) < -(f64::from(c.digits()) - 2.0));
        }
    }

    /// `u = alpha x + beta`, `v = alpha (x + y + g) + beta` with `alpha = 1 / a~`,
    /// `beta = (2 + a + b) / (2 a~)`, `b~ = 1 + b`, `a~ = (1 + b/2)^2 - a^2/4`.
    #[test]
    fn henon_is_conjugate_to_bogdanov_at_zero_gamma(
        a in 1e-3f64..0.1, b in -0.05f64..0.05, x in -0.5f64..0.5, y in -0.5f64..0.5,
    ) {
        let c = ctx();
        let bog = MapFamily::Bogdanov { gamma: c.real(0) };
        let pb = ParamPoint::new(c.real(a), c.real(b));
        let half_b = c.real(b) / 2u32 + 1u32;
        let at = BigReal::with_val(c.bits(), half_b.square_ref()) - c.real(a) * c.real(a) / 4u32;
        let ph = ParamPoint::new(at.clone(), c.real(b) + 1u32);
        let alpha = c.real(1) / &at;
        let beta = (c.real(a) + c.real(b) + 2u32) / (at.clone() * 2u32);
        let h = |p: &[BigReal; 2]| -> [BigReal; 2] {
            let img = bog.eval(&pb, p);
            [alpha.clone() * &p[0] + &beta, alpha.clone() * &img[0] + &beta]
        };
        let pt = [c.real(x), c.real(y)];
        let lhs = MapFamily::Henon.eval(&ph, &h(&pt));
        let rhs = h(&bog.eval(&pb, &pt));
        for i in 0..2 {
            let d = BigReal::with_val(c.bits(), &lhs[i] - &rhs[i]);
            prop_assert!(log10_abs(&d) < -(f64::from(c.digits()) - 5.0));
        }
    }
}
