use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{
    avg_chord_power, chord_average, chord_power_mean, circle_bound, distortion, distortion_at, energy,
    EnergyParams,
};
use crate::geometry::{make_circle, random_closed_curve, random_resolved_curve, regular_chord, regular_radius, resample_arclength, ArcSeparation, Point, PolyCurve};
use crate::optimizer::{canonicalize, objective_grad};
use crate::shape::{fit_conic, width_ratio};
use crate::spectral::{direct_deficit, tetra_check, trig_lemma, FourierCurve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Measured and reported without a pass/fail judgement.
    Recorded,
}

/// One verification check: `measured` compared with `bound` up to `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub status: Status,
    pub measured: f64,
    pub bound: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub rows: Vec<CheckRow>,
}

impl VerificationReport {
    fn push(&mut self, name: &str, status: Status, measured: f64, bound: f64, tolerance: f64, detail: String) {
        self.rows.push(CheckRow {
            name: name.to_string(),
            status,
            measured,
            bound,
            tolerance,
            detail,
        });
    }

    /// Passes when `measured <= bound + tolerance`.
    fn at_most(&mut self, name: &str, measured: f64, bound: f64, tolerance: f64, detail: String) {
        let ok = measured <= bound + tolerance;
        self.push(name, if ok { Status::Pass } else { Status::Fail }, measured, bound, tolerance, detail);
    }

    /// Passes when `measured >= bound - tolerance`.
    fn at_least(&mut self, name: &str, measured: f64, bound: f64, tolerance: f64, detail: String) {
        let ok = measured >= bound - tolerance;
        self.push(name, if ok { Status::Pass } else { Status::Fail }, measured, bound, tolerance, detail);
    }

    fn record(&mut self, name: &str, measured: f64, detail: String) {
        self.push(name, Status::Recorded, measured, f64::NAN, 0.0, detail);
    }

    fn fail(&mut self, name: &str, detail: String) {
        self.push(name, Status::Fail, f64::NAN, f64::NAN, 0.0, detail);
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.status != Status::Fail)
    }

    /// `(passed, failed, recorded)`.
    pub fn counts(&self) -> (usize, usize, usize) {
        self.rows.iter().fold((0, 0, 0), |(p, f, r), row| match row.status {
            Status::Pass => (p + 1, f, r),
            Status::Fail => (p, f + 1, r),
            Status::Recorded => (p, f, r + 1),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            let tag = match row.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Recorded => "INFO",
            };
            writeln!(
                f,
                "{tag} {:<44} measured {:>+.9e}  bound {:>+.9e}  tol {:.1e}  {}",
                row.name, row.measured, row.bound, row.tolerance, row.detail
            )?;
        }
        let (p, fl, r) = self.counts();
        write!(f, "{p} passed, {fl} failed, {r} recorded")
    }
}

/// Runs every property suite on curves generated from `seed`.
pub fn verify_all(seed: u64, n_curves: usize, n: usize) -> Result<VerificationReport> {
    verify_with_files(seed, n_curves, n, &[])
}

/// [`verify_all`] plus a load-time invariant check of each curve file.
pub fn verify_with_files(seed: u64, n_curves: usize, n: usize, files: &[PathBuf]) -> Result<VerificationReport> {
    if n_curves == 0 {
        return Err(Error::Precondition("at least one test curve is required".into()));
    }
    if n < 16 || n % 2 != 0 {
        return Err(Error::Precondition(format!("n = {n} must be even and at least 16")));
    }
    let mut report = VerificationReport::default();
    for path in files {
        match PolyCurve::load(path) {
            Ok(c) => report.at_most(
                "curve file invariants",
                c.edge_spread(),
                crate::geometry::EDGE_SPREAD_RTOL,
                0.0,
                path.display().to_string(),
            ),
            Err(e) => report.fail("curve file invariants", format!("{}: {e}", path.display())),
        }
    }

    let curves: Vec<PolyCurve> = (0..n_curves)
        .map(|i| {
            let dim = if i % 2 == 0 { 3 } else { 2 };
            random_closed_curve(curve_seed(seed, i), 2 + i % 5, 0.6, n, dim)
        })
        .collect::<Result<_>>()?;

    geometry_suite(&mut report, &curves)?;
    functional_suite(&mut report, &curves)?;
    spectral_suite(&mut report, seed, n_curves, n)?;
    lemma_suite(&mut report, seed);
    gradient_suite(&mut report, seed, n_curves.min(20))?;
    shape_suite(&mut report, &curves)?;
    Ok(report)
}

/// Largest edge turning angle of the curves used for the series/direct comparison.
pub const RESOLVED_TURN: f64 = 0.05;

fn curve_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(i as u64)
}

fn geometry_suite(report: &mut VerificationReport, curves: &[PolyCurve]) -> Result<()> {
    let spread = curves.iter().map(|c| c.edge_spread()).fold(0.0, f64::max);
    report.at_most("edge lengths equal", spread, crate::geometry::EDGE_SPREAD_RTOL, 0.0, "max relative spread".into());
    let perim = curves
        .iter()
        .map(|c| (c.perimeter() / (2.0 * PI) - 1.0).abs())
        .fold(0.0, f64::max);
    report.at_most("perimeter is 2π", perim, crate::geometry::PERIMETER_RTOL, 0.0, "max relative error".into());

    let mut excess = f64::NEG_INFINITY;
    for c in curves {
        for i in 0..c.n() {
            for k in 1..c.n() {
                excess = excess.max(c.chord(i, k) - c.arc_distance(k));
            }
        }
    }
    report.at_most("chord <= arc distance", excess, 0.0, 1e-12, "max chord − arc".into());

    let mut drift = 0.0f64;
    for c in curves.iter().take(5) {
        let once = resample_arclength(c, c.n())?;
        let twice = resample_arclength(&once, c.n())?;
        drift = drift.max(
            once.vertices()
                .iter()
                .zip(twice.vertices())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max),
        );
    }
    report.at_most("resampling is idempotent", drift, 0.0, 1e-9, "max vertex motion".into());
    Ok(())
}

fn functional_suite(report: &mut VerificationReport, curves: &[PolyCurve]) -> Result<()> {
    let n = curves[0].n();
    for (j, p) in [(2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (2.0, 1.5)] {
        let params = EnergyParams::new(j, p);
        let bound = circle_bound(params)?;
        let mut worst = f64::INFINITY;
        for c in curves {
            worst = worst.min(energy(c, params)? / bound);
        }
        report.at_least(
            &format!("energy ≥ circle bound (j={j}, p={p})"),
            worst,
            0.95,
            0.0,
            format!("min E/bound, bound = {bound:.9}"),
        );
    }
    // exponents below 1 are outside the inequality's hypotheses: measure only
    let params = EnergyParams::new(1.0, 0.5);
    let bound = circle_bound(params)?;
    let mut worst = f64::INFINITY;
    for c in curves {
        worst = worst.min(energy(c, params)? / bound);
    }
    report.record("energy vs circle bound (j=1, p=0.5)", worst, "min E/bound".into());

    let circle = make_circle(n)?;
    let mut excess = f64::NEG_INFINITY;
    for p in [1.0, 1.5, 2.0] {
        let reference = avg_chord_power(&circle, p)?;
        for c in curves {
            excess = excess.max(avg_chord_power(c, p)? - reference);
        }
    }
    report.at_most("A_p ≤ A_p(regular polygon), p ≤ 2", excess, 0.0, 1e-12, "max A_p − A_p(circle)".into());

    let mut step = f64::INFINITY;
    for c in curves {
        let values: Vec<f64> = [0.5, 1.0, 2.0, 3.0, 4.0]
            .iter()
            .map(|&p| avg_chord_power(c, p))
            .collect::<Result<_>>()?;
        step = step.min(values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min));
    }
    report.at_least("A_p nondecreasing in p", step, 0.0, 1e-12, "min consecutive increment".into());

    // The equal-edge polygon analogue of λ(s) is the regular polygon chord.
    let fs: [(&str, fn(f64) -> f64); 3] = [("sqrt", f64::sqrt), ("log", f64::ln), ("x^0.4", |x| x.powf(0.4))];
    for (name, f) in fs {
        let mut excess = f64::NEG_INFINITY;
        for c in curves {
            for k in 1..=n / 2 {
                let sep = ArcSeparation::from_steps(k, n)?;
                let bound = f(regular_chord(k, n).powi(2));
                excess = excess.max(chord_average(c, sep, f) - bound);
            }
        }
        report.at_most(
            &format!("chord average ≤ f(λ_N²), f = {name}"),
            excess,
            0.0,
            1e-10,
            "max over curves and separations".into(),
        );
    }

    let floor = FRAC_PI_2 / regular_radius(n);
    let worst = curves.iter().map(distortion).fold(f64::INFINITY, f64::min);
    report.at_least("distortion ≥ π/2", worst, FRAC_PI_2, 1e-9, format!("min over curves; polygon floor {floor:.12}"));
    let mut gap = f64::INFINITY;
    for c in curves {
        for k in 1..=n / 2 {
            let sep = ArcSeparation::from_steps(k, n)?;
            gap = gap.min(distortion_at(c, sep) - sep.arc_distance() / regular_chord(k, n));
        }
    }
    report.at_least("distortion_s ≥ s/λ_N(s)", gap, 0.0, 1e-12, "min over curves and separations".into());
    Ok(())
}

fn spectral_suite(report: &mut VerificationReport, seed: u64, n_curves: usize, n: usize) -> Result<()> {
    let mut violations = 0usize;
    let mut worst = f64::INFINITY;
    let count = 4 * n_curves;
    for i in 0..count {
        let dim = if i % 2 == 0 { 2 } else { 3 };
        let fc = FourierCurve::random(curve_seed(seed ^ 0x5eed, i), dim, 2 + i % 7, 0.7)?;
        let profile = fc.deficit_profile(n);
        violations += profile.violations();
        worst = worst.min(profile.min() / profile.scale.max(1.0));
    }
    report.at_most(
        "deficit ≥ 0 on random Fourier curves",
        violations as f64,
        0.0,
        0.0,
        format!("{count} curves, min ρ/max(1, L) = {worst:.3e}"),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xe111);
    let mut sup = 0.0f64;
    for _ in 0..n_curves {
        let mut coeffs = vec![[Complex64::new(0.0, 0.0); 3]; 5];
        for slot in [1usize, 2, 3] {
            for d in 0..3 {
                coeffs[slot][d] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        // real space curve: a_{-1} = conj(a_1), a_0 real
        coeffs[1] = coeffs[3].map(|z| z.conj());
        coeffs[2] = coeffs[2].map(|z| Complex64::new(z.re, 0.0));
        let fc = FourierCurve::from_coeffs(3, coeffs)?;
        sup = sup.max(fc.deficit_profile(n).max_abs());
    }
    report.at_most("deficit ≡ 0 on a_0 + cos t a + sin t b", sup, 0.0, 1e-9, "sup |ρ| over grid".into());

    let mut rel = 0.0f64;
    let fine = 2048;
    for i in 0..n_curves.min(5) {
        // the comparison is a quadrature check, so the polygon must resolve every bend
        let c = random_resolved_curve(curve_seed(seed ^ 0xd1, i), 6, 0.6, fine, 2 + i % 2, RESOLVED_TURN)?;
        let fc = FourierCurve::analyze(&c);
        let sep = ArcSeparation::from_steps(fine / 2, fine)?;
        let series = fc.deficit(sep.arclength());
        rel = rel.max((direct_deficit(&c, sep) - series).abs() / series.abs().max(1e-300));
    }
    report.at_most(
        "series and direct deficit agree",
        rel,
        0.0,
        1e-4,
        format!("max relative gap at s = π, N = {fine}, edge turn ≤ {RESOLVED_TURN}"),
    );
    Ok(())
}

fn lemma_suite(report: &mut VerificationReport, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1e44);
    let mut violations = 0usize;
    for _ in 0..10_000 {
        let k = rng.random_range(2..=50u32);
        let theta = rng.random_range(-10.0..10.0);
        let (lhs, rhs) = trig_lemma(k, theta).expect("k >= 2");
        if lhs > rhs + 1e-12 * rhs.max(1.0) {
            violations += 1;
        }
    }
    report.at_most("sin²(kθ) ≤ k² sin²θ", violations as f64, 0.0, 0.0, "10⁴ samples".into());

    let point = |rng: &mut ChaCha8Rng, dim: usize| {
        let mut p = Point::zeros();
        for c in p.iter_mut().take(dim) {
            *c = rng.random_range(-1.0..1.0);
        }
        p
    };
    let mut worst = f64::INFINITY;
    for i in 0..10_000 {
        let dim = 2 + i % 2;
        let (a, b, c, d) = (point(&mut rng, dim), point(&mut rng, dim), point(&mut rng, dim), point(&mut rng, dim));
        worst = worst.min(tetra_check(&a, &b, &c, &d).gap);
    }
    report.at_least("quadrilateral inequality gap ≥ 0", worst, 0.0, 1e-12, "10⁴ quadruples in R² and R³".into());

    let mut equal = 0.0f64;
    for i in 0..1_000 {
        let dim = 2 + i % 2;
        let (a, b, d) = (point(&mut rng, dim), point(&mut rng, dim), point(&mut rng, dim));
        let scale = rng.random_range(0.0..2.0);
        let c = d + (b - a) * scale;
        equal = equal.max(tetra_check(&a, &b, &c, &d).gap.abs());
    }
    report.at_most("quadrilateral equality when DC ∥ AB", equal, 0.0, 1e-12, "10³ constructed cases".into());
}

/// Largest deviation between the analytic gradient and central differences,
/// relative to the largest gradient component.
pub(crate) fn gradient_error(curve: &PolyCurve, p: f64) -> Result<f64> {
    let grad = objective_grad(curve, p)?;
    let scale = grad.iter().map(|g| g.amax()).fold(0.0, f64::max);
    let h = 1e-6;
    let mut worst = 0.0f64;
    for m in 0..curve.n() {
        for d in 0..curve.dim() {
            let shifted = |s: f64| {
                let mut v = curve.vertices().to_vec();
                v[m][d] += s;
                PolyCurve::from_vertices(curve.dim(), v)
            };
            let fd = (chord_power_mean(&shifted(h)?, p)? - chord_power_mean(&shifted(-h)?, p)?) / (2.0 * h);
            worst = worst.max((fd - grad[m][d]).abs() / scale);
        }
    }
    Ok(worst)
}

fn gradient_suite(report: &mut VerificationReport, seed: u64, count: usize) -> Result<()> {
    let mut worst = 0.0f64;
    for i in 0..count {
        let c = random_closed_curve(curve_seed(seed ^ 0x67, i), 4, 0.6, 32, 2)?;
        for p in [1.5, 2.0, 3.0, 4.0] {
            worst = worst.max(gradient_error(&c, p)?);
        }
    }
    report.at_most(
        "A_p^p gradient vs central differences",
        worst,
        0.0,
        1e-6,
        format!("{count} curves, p ∈ {{1.5, 2, 3, 4}}"),
    );
    Ok(())
}

fn shape_suite(report: &mut VerificationReport, curves: &[PolyCurve]) -> Result<()> {
    let mut width_drift = 0.0f64;
    let mut residual_drift = 0.0f64;
    for (i, c) in curves.iter().filter(|c| c.dim() == 2).enumerate().take(10) {
        let angle = 0.3 + i as f64;
        let moved = c.rotated_z(angle).translated(&Point::new(0.5, -1.5, 0.0));
        let a = width_ratio(&canonicalize(c)?, 360)?;
        let b = width_ratio(&canonicalize(&moved)?, 360)?;
        width_drift = width_drift.max((a - b).abs());
        let r0 = fit_conic(c)?.residual;
        let r1 = fit_conic(&c.rotated_z(angle))?.residual;
        residual_drift = residual_drift.max((r0 - r1).abs());
    }
    report.at_most("width ratio under rigid motions", width_drift, 0.0, 1e-9, "after canonicalization".into());
    report.at_most("conic residual under rotations", residual_drift, 0.0, 1e-9, "max change".into());
    Ok(())
}
