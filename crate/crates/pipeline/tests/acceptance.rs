//! One line per acceptance criterion. Run with `cargo test --test acceptance`.

use btzone::asymptotics::{
    analytic_first_log_coefficient, build_matrix, solve_coefficients, AsymptoticSequence, FitMode, FitTarget,
};
use btzone::manifolds::{compute_series, Branch};
use btzone::maps::{MapFamily, ParamPoint};
use btzone::numerics::{log10_abs, log10_abs_complex, BigComplex, BigReal, Precision};
use btzone::splitting::{real_harmonics_from_samples, Harmonics, Node, SplittingConfig};
use btzone::variational::{jacobian_along_stable, wronskian_series};
use btzone_pipeline::analysis::{constant_check, correlation, extrapolability, stability, Loaded};
use btzone_pipeline::dataset::DATASET_FILE;
use btzone_pipeline::scan::{load_records, scan_widths, NodeRecord, Outcome};
use btzone_pipeline::{Method, ScanConfig};
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

const HENON_CONSTANT: &str = "2.4744255935e6";
const BOGDANOV_CONSTANT: &str = "4.05522622851e26";
const BOGDANOV_A0: f64 = 61.26721889;

struct Tally {
    failed: Vec<String>,
    /// Criteria reported but not enforced.
    advisory: Vec<&'static str>,
}

impl Tally {
    fn line(&mut self, id: &'static str, pass: bool, detail: String) {
        println!("criterion {id:<3} {}  {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass && !self.advisory.contains(&id) {
            self.failed.push(id.to_string());
        }
    }
}

fn scan(dir: &Path, family: &str, gamma: Option<&str>, range: &str, method: Method, target: u32) -> Loaded {
    let cfg = ScanConfig {
        family: family.into(),
        gamma: gamma.map(str::to_string),
        range: range.into(),
        nodes: 24,
        method,
        digits_target: target,
        out: dir.into(),
        ..ScanConfig::default()
    };
    let t = Instant::now();
    let s = scan_widths(&cfg).expect("scan");
    assert_eq!(s.failed, 0, "{family} scan had failed nodes");
    eprintln!("  {family} scan: {} nodes at {} digits in {:.0?}", s.records.len(), s.dataset.get("digits").unwrap(), t.elapsed());
    Loaded::open(&dir.join(DATASET_FILE)).expect("dataset")
}

/// Largest excess (in decades) over the error bound and over the ±1 decade
/// band of the method-gap relation.
fn method_excess(records: &[NodeRecord]) -> (f64, f64, usize) {
    let mut bound = f64::NEG_INFINITY;
    let mut band = f64::NEG_INFINITY;
    let mut n = 0;
    for r in records {
        if let Outcome::Ok { real: Some(re), complex: Some(c), log10_method_gap: Some(gap), .. } = &r.outcome {
            let predicted = c.log10_first_harmonic + c.log10_gain;
            bound = bound.max(gap - re.log10_width - (1.0 + predicted));
            band = band.max((gap - (re.log10_width + predicted)).abs() - 1.0);
            n += 1;
        }
    }
    (bound, band, n)
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

const ORDER: usize = 16;

fn log_points(lo: f64, hi: f64) -> Vec<f64> {
    (0..8).map(|i| lo * (hi / lo).powf(i as f64 / 7.0)).collect()
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

fn manifold_slopes() -> (f64, f64) {
    let c = Precision::with_digits(80).unwrap();
    let fam = MapFamily::Bogdanov { gamma: c.real(3) };
    let m = c.real(0.01);
    let p = ParamPoint::new(m.clone(), fam.predicted_homoclinic_slave(&m));
    let map = fam.quadratic_form(&p);
    let mut conj = f64::INFINITY;
    for branch in [Branch::Stable, Branch::Unstable] {
        let s = compute_series(&fam, &p, branch, ORDER, &c).unwrap();
        let d = s.radius_estimate(ORDER / 2..=ORDER) / 2.0;
        let pts: Vec<(f64, f64)> = log_points(d / 8.0, d)
            .into_iter()
            .map(|z| (z.log10(), log10_abs(&s.conjugacy_residual(&map, &c.real(z)))))
            .collect();
        conj = conj.min(slope(&pts));
    }
    let s = compute_series(&fam, &p, Branch::Stable, ORDER, &c).unwrap();
    let j = jacobian_along_stable(&map, &s, &c);
    let w = wronskian_series(&j, &s.lambda, &c).unwrap();
    let d = s.radius_estimate(ORDER / 2..=ORDER) / 2.0;
    let dw = d.min(w.radius_estimate(ORDER / 2..=ORDER) / 2.0);
    let pts: Vec<(f64, f64)> = log_points(dw / 8.0, dw / 2.0)
        .into_iter()
        .map(|r| (r.log10(), circle_max(r, &c, |z| w.residual(&j, &s.lambda, z).unwrap())))
        .collect();
    (conj, slope(&pts))
}

/// Largest `log10 |P_k| - log10 (M e^(-2 pi |k| rho))` over `k = -2..=2`.
fn decay_envelope_excess() -> f64 {
    let lo = Precision::with_digits(40).unwrap();
    let k = MapFamily::Henon.leading_width(&BigReal::with_val(lo.bits(), 1u32 - lo.real(1e-3))).unwrap();
    let ctx = Precision::with_digits(log10_abs(&k).abs().ceil() as u32 + 80).unwrap();
    let prec = ctx.bits();
    let main = BigReal::with_val(prec, 1u32 - ctx.parse("1e-3").unwrap());
    let seed = MapFamily::Henon.predicted_homoclinic_slave(&main);
    let node = Node::new(&MapFamily::Henon, &main, &seed, &ctx, &SplittingConfig::default()).unwrap();
    let frame = node.find_primary_homoclinic(&seed, None).unwrap();
    let w = node.width_real(&frame).unwrap();
    let pair = node.pair(&w.anchor).unwrap();
    let rho = node.strip_halfwidth(&pair) / 2u32;
    const N: usize = 16;
    let theta = |re: f64, im: &BigReal| {
        let t = BigComplex::with_val(prec, (ctx.real(re), im));
        node.splitting_determinant(&pair, &frame, &t).unwrap()
    };
    let zero = ctx.zero();
    let samples: Vec<BigComplex> = (0..N).map(|j| theta(j as f64 / N as f64, &zero)).collect();
    let mut m = f64::NEG_INFINITY;
    for sign in [1i32, -1] {
        let im = BigReal::with_val(prec, &rho * sign);
        for j in 0..N {
            m = m.max(log10_abs_complex(&theta(j as f64 / N as f64, &im)));
        }
    }
    let two_pi = ctx.pi() * 2u32;
    let mut worst = f64::NEG_INFINITY;
    for k in -2i32..=2 {
        let mut p = BigComplex::new(prec);
        for (j, s) in samples.iter().enumerate() {
            let ang = BigReal::with_val(prec, &two_pi * (-k * j as i32)) / N as u32;
            p += BigComplex::with_val(prec, s * &BigComplex::with_val(prec, (ang.clone().cos(), ang.sin())));
        }
        p /= N as u32;
        let env = m - 2.0 * std::f64::consts::PI * f64::from(k.abs()) * rho.to_f64() / std::f64::consts::LN_10;
        worst = worst.max(log10_abs_complex(&p) - env);
    }
    worst
}

/// Worst `log10` coefficient error of 24-term interpolation on exact data, per sequence.
fn round_trip_error(c: &Precision) -> f64 {
    let seqs = [
        AsymptoticSequence::dulac(4, 4, FitTarget::LogWidth),
        AsymptoticSequence::dulac(2, 1, FitTarget::LogWidth),
        AsymptoticSequence::polynomial(4, FitTarget::Width),
    ];
    let n = 24;
    let mut worst = f64::NEG_INFINITY;
    for seq in seqs {
        let alpha: Vec<BigReal> = (0..n).map(|i| c.real(((i * 7919) % 23) as f64 / 11.0 - 1.0)).collect();
        let xs: Vec<BigReal> = (0..n).map(|j| c.real(j as u32 + 1) / c.real(n as u32 + 1)).collect();
        let a = build_matrix(&seq, &xs).unwrap();
        let w: Vec<BigReal> = a
            .iter()
            .map(|row| row.iter().zip(&alpha).fold(c.zero(), |s, (f, al)| s + BigReal::with_val(c.bits(), f * al)))
            .collect();
        let sol = solve_coefficients(&seq, &a, &w, c).unwrap();
        for (got, want) in sol.alpha.iter().zip(&alpha) {
            worst = worst.max(log10_abs(&(got.clone() - want)));
        }
    }
    worst
}

fn conj_exact() -> bool {
    let c = Precision::with_digits(40).unwrap();
    let vals = [0.3, -1.7, 2.2, 1e-9];
    let Harmonics::Real { rm1, rp1, .. } =
        real_harmonics_from_samples(&c, &c.real(vals[0]), &c.real(vals[1]), &c.real(vals[2]), &c.real(vals[3]))
    else {
        return false;
    };
    rp1 == rm1.conj()
}

fn small_scan(dir: &Path, workers: usize, resume: bool) -> String {
    let cfg = ScanConfig {
        family: "henon".into(),
        gamma: None,
        range: "1e-3:4e-3".into(),
        nodes: 4,
        workers,
        resume,
        out: dir.into(),
        ..ScanConfig::default()
    };
    scan_widths(&cfg).expect("small scan");
    fs::read_to_string(dir.join(DATASET_FILE)).unwrap()
}

fn deterministic_and_resumable(tmp: &Path) -> bool {
    let a = small_scan(&tmp.join("det-a"), 1, false);
    let b = small_scan(&tmp.join("det-b"), 2, false);
    let cut = a.trim_end().rfind('\n').unwrap() + 5;
    fs::write(tmp.join("det-a").join(DATASET_FILE), &a[..cut]).unwrap();
    let resumed = small_scan(&tmp.join("det-a"), 1, true);
    a == b && a == resumed
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let mut t = Tally { failed: Vec::new(), advisory: vec!["4"] };

    eprintln!("running acceptance scans");
    let henon = scan(&root.join("henon"), "henon", None, "1e-4:1e-2", Method::Both, 30);
    let bogdanov = scan(&root.join("bogdanov"), "bogdanov", Some("3"), "0.0064:0.0256", Method::Real, 30);
    let quadratic = scan(&root.join("quadratic"), "quadratic", Some("-3"), "1.296e-5:2.0736e-4", Method::Both, 30);
    let henon80 = scan(&root.join("henon80"), "henon", None, "1e-4:1e-2", Method::Real, 13);

    let c1 = constant_check(&henon, henon.basis(Some(11)).unwrap(), HENON_CONSTANT).unwrap();
    t.line(
        "1",
        c1.matched_digits > 6.0,
        format!("Henon A~_0 = {} vs {HENON_CONSTANT}: {:.2} digits (need > 6)", short(&c1.fitted), c1.matched_digits),
    );

    let c2 = constant_check(&bogdanov, bogdanov.basis(Some(14)).unwrap(), BOGDANOV_CONSTANT).unwrap();
    let ln_theta = bogdanov.ctx.parse(BOGDANOV_CONSTANT).unwrap().ln().to_f64();
    let a0 = bogdanov.fit(bogdanov.basis(Some(14)).unwrap(), FitMode::Interpolate).unwrap().alpha[0].to_f64();
    t.line(
        "2",
        c2.matched_digits > 5.0 && (ln_theta - BOGDANOV_A0).abs() < 1e-6,
        format!(
            "exp(A_0) = {}: {:.2} digits (need > 5); A_0 = {a0:.8}; |ln Theta - {BOGDANOV_A0}| = {:.1e}",
            short(&c2.fitted),
            c2.matched_digits,
            (ln_theta - BOGDANOV_A0).abs()
        ),
    );

    let b1 = first_log(&bogdanov, 14);
    let n1 = first_log(&quadratic, 14);
    t.line(
        "3",
        b1.2 > 3.0 && n1.2 > 3.0,
        format!(
            "B_1 = {:.9} vs {:.9} ({:.2} digits), N_1 = {:.9} vs {:.9} ({:.2} digits); need > 3",
            b1.0, b1.1, b1.2, n1.0, n1.1, n1.2
        ),
    );

    let mut detail = String::new();
    let mut ok4 = true;
    for (name, dir) in [("Henon", "henon"), ("Quadratic", "quadratic")] {
        let (bound, band, n) = method_excess(&load_records(&root.join(dir)).unwrap());
        ok4 &= bound < 0.0 && band <= 0.0;
        detail.push_str(&format!("{name} {n} nodes: bound excess {bound:.2}, band excess {band:.2} decades; "));
    }
    t.line("4", ok4, detail.trim_end_matches("; ").to_string());

    let n = henon.data.nodes.len();
    let e = extrapolability(&henon, n / 2, n / 4).unwrap();
    t.line(
        "5",
        e.relative_error < 0.05,
        format!(
            "slope {:.3} vs {:.3} from the omitted {} term: {:.1}% off (need < 5%)",
            e.slope,
            e.expected,
            e.omitted,
            100.0 * e.relative_error
        ),
    );

    let basis = henon80.basis(Some(11)).unwrap();
    let s = stability(&henon80, basis, &[20, 40, 60], 8, 1).unwrap();
    let series = s.series(basis / 2);
    let r = correlation(&series);
    let digits: Vec<String> = series.iter().map(|(n, d)| format!("N={n:.0}: {d:.1}")).collect();
    t.line(
        "6",
        r >= 0.95,
        format!(
            "{} at {} digits, {}; correlation {r:.4} (need >= 0.95)",
            henon80.sequence.coefficient_name(basis / 2),
            henon80.ctx.digits(),
            digits.join(", ")
        ),
    );

    let (conj, wr) = manifold_slopes();
    let env = decay_envelope_excess();
    let c = Precision::with_digits(60).unwrap();
    let rt = round_trip_error(&c);
    let ce = conj_exact();
    let det = deterministic_and_resumable(root);
    let bar = (ORDER - 1) as f64;
    t.line(
        "7",
        conj >= bar && wr >= bar && env <= 1.0 && rt < -(f64::from(c.digits()) - 20.0) && ce && det,
        format!(
            "conjugacy slope {conj:.1}, Wronskian slope {wr:.1} (need >= {bar}); envelope excess {env:.2} decades; \
             round-trip 1e{rt:.0} at D={}; conj {ce}; deterministic+resume {det}",
            c.digits()
        ),
    );

    if t.failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failed criteria: {}", t.failed.join(", "));
        ExitCode::FAILURE
    }
}

/// Fitted and closed-form first log coefficient with matched digits.
fn first_log(loaded: &Loaded, ell: usize) -> (f64, f64, f64) {
    let coeffs = loaded.fit(loaded.basis(Some(ell)).unwrap(), FitMode::Interpolate).unwrap();
    let fitted = coeffs.first_log_coefficient().unwrap();
    let exact = analytic_first_log_coefficient(&loaded.family).unwrap();
    let rel = BigReal::with_val(loaded.ctx.bits(), fitted - &exact) / &exact;
    (fitted.to_f64(), exact.to_f64(), -log10_abs(&rel))
}

fn short(v: &str) -> String {
    v.parse::<f64>().map(|f| format!("{f:.10e}")).unwrap_or_else(|_| v.to_string())
}
