//! Double-integral functionals of closed curves.
//!
//! Every functional is a uniform Riemann sum over vertex pairs with weight
//! `(2π/N)²`. Rows of the double sum are evaluated in parallel and reduced
//! with a fixed pairwise tree, so values are bit-identical at any thread count.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::{ArcSeparation, PolyCurve};
use crate::quadrature;
use crate::reduce::{sum_rows, try_sum_rows};

/// Distances below this are treated as coincident vertices.
pub const COINCIDENT_TOL: f64 = 1e-12;

/// Below this arclength the circle-bound integrand is replaced by its leading term.
pub const SERIES_CUTOFF: f64 = 1e-4;

/// Exponents `(j, p)` of the O'Hara energy `E_j^p`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EnergyParams {
    pub j: f64,
    pub p: f64,
}

impl EnergyParams {
    pub fn new(j: f64, p: f64) -> Self {
        Self { j, p }
    }

    /// The energy integral converges for smooth embedded curves iff `j < 2 + 1/p`.
    pub fn convergent(&self) -> bool {
        self.j > 0.0 && self.p > 0.0 && self.j < 2.0 + 1.0 / self.p
    }

    /// The circle is the proven unique minimizer when additionally `p >= 1`.
    pub fn theorem_applies(&self) -> bool {
        self.convergent() && self.p >= 1.0
    }

    fn require_convergent(&self) -> Result<()> {
        if self.convergent() {
            Ok(())
        } else {
            Err(Error::ParameterDomain(format!(
                "E_j^p with j = {}, p = {} needs 0 < j < 2 + 1/p",
                self.j, self.p
            )))
        }
    }
}

type KernelFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Integrand `F(chord, arc)` of a renormalization energy, with caller-asserted
/// shape flags on `x ↦ F(√x, y)` for `x ∈ (0, y²]`, `y ∈ (0, π)`.
pub struct ChordKernel {
    eval: Box<KernelFn>,
    /// `F(√x, y)` is non-increasing in `x`.
    pub decreasing: bool,
    /// `F(√x, y)` is convex in `x`.
    pub convex: bool,
}

impl std::fmt::Debug for ChordKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChordKernel")
            .field("decreasing", &self.decreasing)
            .field("convex", &self.convex)
            .finish_non_exhaustive()
    }
}

impl ChordKernel {
    /// A kernel with no shape claims.
    pub fn new(eval: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Box::new(eval),
            decreasing: false,
            convex: false,
        }
    }

    pub fn with_flags(mut self, decreasing: bool, convex: bool) -> Self {
        self.decreasing = decreasing;
        self.convex = convex;
        self
    }

    /// `F(x, y) = (x^{-j} − y^{-j})^p`, the integrand of `E_j^p`.
    pub fn ohara(params: EnergyParams) -> Self {
        let EnergyParams { j, p } = params;
        Self::new(move |x, y| ohara_term(x, y, j, p)).with_flags(true, params.p >= 1.0)
    }

    #[inline]
    pub fn eval(&self, chord: f64, arc: f64) -> f64 {
        (self.eval)(chord, arc)
    }

    /// Samples `F(√x, y)` on a grid and rejects a flag the samples contradict.
    pub fn check_flags(&self) -> Result<()> {
        const YS: usize = 16;
        const XS: usize = 48;
        for a in 1..=YS {
            let y = PI * a as f64 / (YS + 1) as f64;
            let g: Vec<f64> = (1..=XS)
                .map(|b| {
                    let x = y * y * b as f64 / XS as f64;
                    self.eval(x.sqrt(), y)
                })
                .collect();
            if g.iter().any(|v| !v.is_finite()) {
                continue;
            }
            let scale = g.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let tol = 1e-9 * scale;
            if self.decreasing {
                if let Some(w) = g.windows(2).position(|w| w[1] > w[0] + tol) {
                    return Err(Error::KernelFlagViolation(format!(
                        "F(√x, {y:.4}) increases near x = {:.4}",
                        y * y * (w + 1) as f64 / XS as f64
                    )));
                }
            }
            if self.convex {
                if let Some(w) = g.windows(3).position(|w| w[0] - 2.0 * w[1] + w[2] < -tol) {
                    return Err(Error::KernelFlagViolation(format!(
                        "F(√x, {y:.4}) is not convex near x = {:.4}",
                        y * y * (w + 2) as f64 / XS as f64
                    )));
                }
            }
        }
        Ok(())
    }
}

#[inline]
fn ohara_term(chord: f64, arc: f64, j: f64, p: f64) -> f64 {
    // chord <= arc on a polygon; clamp the rounding error at collinear pairs
    let diff = (chord.powf(-j) - arc.powf(-j)).max(0.0);
    if p == 1.0 {
        diff
    } else {
        diff.powf(p)
    }
}

/// `E_j^p[c] = ∬ (|c(s) − c(t)|^{-j} − d(s,t)^{-j})^p ds dt`, diagonal excluded.
///
/// Adjacent vertices of an equilateral polygon have chord equal to arc
/// distance, so their terms vanish and no cutoff beyond the diagonal is used.
pub fn energy(curve: &PolyCurve, params: EnergyParams) -> Result<f64> {
    params.require_convergent()?;
    let EnergyParams { j, p } = params;
    let n = curve.n();
    let h = curve.step();
    let total = try_sum_rows(n, |i| {
        let xi = curve.vertex(i);
        let mut row = 0.0;
        for k in 1..n {
            let chord = (curve.vertex(i + k) - xi).norm();
            if chord < COINCIDENT_TOL {
                return Err(Error::DegenerateCurve { i, k: (i + k) % n });
            }
            row += ohara_term(chord, curve.arc_distance(k), j, p);
        }
        Ok(row)
    })?;
    Ok(total * h * h)
}

/// O'Hara's normalization `e_j^p = (1/j) (E_j^p)^{1/p}`.
pub fn normalized_energy(curve: &PolyCurve, params: EnergyParams) -> Result<f64> {
    Ok(energy(curve, params)?.powf(1.0 / params.p) / params.j)
}

/// `∬ F(|c(s) − c(t)|, d(s,t)) ds dt` over off-diagonal vertex pairs.
pub fn renormalization_energy(curve: &PolyCurve, kernel: &ChordKernel) -> Result<f64> {
    let n = curve.n();
    let h = curve.step();
    let total = try_sum_rows(n, |i| {
        let mut row = 0.0;
        for k in 1..n {
            let chord = curve.chord(i, k);
            let arc = curve.arc_distance(k);
            let value = kernel.eval(chord, arc);
            if !value.is_finite() {
                return Err(Error::KernelSingularity {
                    i,
                    k: (i + k) % n,
                    chord,
                    arc,
                    value,
                });
            }
            row += value;
        }
        Ok(row)
    })?;
    Ok(total * h * h)
}

/// `sin(s)/s − 1` without cancellation for small `s`.
fn sinc_minus_one(s: f64) -> f64 {
    if s.abs() < 0.1 {
        let s2 = s * s;
        // −s²/3! + s⁴/5! − s⁶/7! + s⁸/9!
        s2 * (-1.0 / 6.0 + s2 * (1.0 / 120.0 + s2 * (-1.0 / 5040.0 + s2 / 362_880.0)))
    } else {
        s.sin() / s - 1.0
    }
}

/// `(1/sin s)^j − (1/s)^j`, computed as `s^{-j} expm1(−j ln(sin s / s))`.
fn circle_integrand_base(s: f64, j: f64) -> f64 {
    let log_ratio = -sinc_minus_one(s).ln_1p();
    s.powf(-j) * (j * log_ratio).exp_m1()
}

/// Energy of the unit circle, the sharp lower bound
/// `E_j^p ≥ 2^{3−jp} π ∫_0^{π/2} ((1/sin s)^j − (1/s)^j)^p ds`.
///
/// Below [`SERIES_CUTOFF`] the integrand is replaced by its leading term
/// `(j/6)^p s^{(2−j)p}`, integrated in closed form.
pub fn circle_bound(params: EnergyParams) -> Result<f64> {
    params.require_convergent()?;
    let EnergyParams { j, p } = params;
    let q = (2.0 - j) * p;
    let head = (j / 6.0).powf(p) * SERIES_CUTOFF.powf(q + 1.0) / (q + 1.0);
    let tail = quadrature::integrate(
        |s| circle_integrand_base(s, j).powf(p),
        SERIES_CUTOFF,
        FRAC_PI_2,
        1e-12,
        20_000,
    );
    let prefactor = 2f64.powf(3.0 - j * p) * PI;
    Ok(prefactor * (head + tail.value))
}

/// Average chord power `A_p = ((1/4π²) ∬ |c(t) − c(s)|^p dt ds)^{1/p}`.
pub fn avg_chord_power(curve: &PolyCurve, p: f64) -> Result<f64> {
    Ok(chord_power_mean(curve, p)?.powf(1.0 / p))
}

/// `A_p^p`, the mean of `|x_i − x_k|^p` over all vertex pairs including the diagonal.
pub fn chord_power_mean(curve: &PolyCurve, p: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::ParameterDomain(format!("A_p needs p > 0, got {p}")));
    }
    let n = curve.n();
    let total = sum_rows(n, |i| {
        let xi = curve.vertex(i);
        (1..n).map(|k| (curve.vertex(i + k) - xi).norm().powf(p)).sum()
    });
    Ok(total / (n * n) as f64)
}

/// `sup_t s / |c(t+s) − c(t)|` over the vertices, using the arc distance
/// `min(s, 2π − s)`. Returns `f64::INFINITY` when a chord vanishes.
pub fn distortion_at(curve: &PolyCurve, sep: ArcSeparation) -> f64 {
    let k = sep.steps();
    let arc = curve.arc_distance(k);
    (0..curve.n())
        .map(|i| {
            let chord = curve.chord(i, k);
            if chord < COINCIDENT_TOL {
                f64::INFINITY
            } else {
                arc / chord
            }
        })
        .fold(0.0, f64::max)
}

/// Distortion over grid separations `1..=N/2`; `f64::INFINITY` for curves with
/// coincident vertices (such as the double segment).
pub fn distortion(curve: &PolyCurve) -> f64 {
    let n = curve.n();
    crate::reduce::rows(n / 2, |k| {
        distortion_at(curve, ArcSeparation::from_steps(k + 1, n).expect("k in 1..=N/2"))
    })
    .into_iter()
    .fold(0.0, f64::max)
}

/// `(1/N) Σ_i f(|x_{i+k} − x_i|²)` for the grid separation `s = 2πk/N`.
pub fn chord_average<F>(curve: &PolyCurve, sep: ArcSeparation, f: F) -> f64
where
    F: Fn(f64) -> f64,
{
    let k = sep.steps();
    let values: Vec<f64> = (0..curve.n())
        .map(|i| f((curve.vertex(i + k) - curve.vertex(i)).norm_squared()))
        .collect();
    crate::reduce::pairwise_sum(&values) / curve.n() as f64
}

/// `A_p` of the unit circle, `((2^p/π) ∫_0^π sin^p u du)^{1/p}`, by quadrature.
pub fn circle_avg_chord_power(p: f64) -> f64 {
    let integral = quadrature::integrate(|u: f64| u.sin().powf(p), 0.0, PI, 1e-13, 10_000).value;
    (2f64.powf(p) / PI * integral).powf(1.0 / p)
}

/// `A_p` of the doubly covered segment of length π, `(2π^p/((p+1)(p+2)))^{1/p}`.
pub fn segment_avg_chord_power(p: f64) -> f64 {
    (2.0 * PI.powf(p) / ((p + 1.0) * (p + 2.0))).powf(1.0 / p)
}

/// The exponent where the double segment overtakes the circle in `A_p`,
/// found by bisection of `A_p(segment) − A_p(circle)` on `[2, 4]` to `1e-9`.
pub fn crossover_segment_circle() -> f64 {
    let g = |p: f64| segment_avg_chord_power(p) - circle_avg_chord_power(p);
    let (mut lo, mut hi) = (2.0, 4.0);
    debug_assert!(g(lo) < 0.0 && g(hi) > 0.0);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Weight of one vertex pair, `(2π/N)²`.
pub fn pair_weight(n: usize) -> f64 {
    let h = TAU / n as f64;
    h * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_circle, make_double_segment, random_closed_curve};
    use approx::assert_abs_diff_eq;

    #[test]
    fn params_domain() {
        assert!(EnergyParams::new(2.0, 1.0).theorem_applies());
        assert!(EnergyParams::new(2.4, 2.0).convergent());
        assert!(!EnergyParams::new(2.5, 2.0).convergent());
        assert!(EnergyParams::new(1.0, 0.5).convergent());
        assert!(!EnergyParams::new(1.0, 0.5).theorem_applies());
    }

    #[test]
    fn circle_energy_near_four() {
        let c = make_circle(1024).unwrap();
        let e = energy(&c, EnergyParams::new(2.0, 1.0)).unwrap();
        assert!((e - 4.0).abs() < 0.05, "{e}");
    }

    #[test]
    fn circle_energy_converges_monotonically() {
        // Oracle: the bound integral 2π ∫(csc² s − s⁻²) = 2π · 2/π = 4.
        let errs: Vec<f64> = [128, 256, 512]
            .iter()
            .map(|&n| energy(&make_circle(n).unwrap(), EnergyParams::new(2.0, 1.0)).unwrap() - 4.0)
            .collect();
        assert!(errs[0].abs() > errs[1].abs() && errs[1].abs() > errs[2].abs(), "{errs:?}");
    }

    #[test]
    fn energy_rejects_degenerate_and_divergent() {
        let s = make_double_segment(64).unwrap();
        assert!(matches!(
            energy(&s, EnergyParams::new(2.0, 1.0)),
            Err(Error::DegenerateCurve { .. })
        ));
        let c = make_circle(64).unwrap();
        assert!(matches!(
            energy(&c, EnergyParams::new(2.5, 2.0)),
            Err(Error::ParameterDomain(_))
        ));
    }

    #[test]
    fn circle_bound_closed_forms() {
        // −cot s + 1/s antiderivative: ∫_0^{π/2} csc² s − s⁻² ds = 2/π.
        let b = circle_bound(EnergyParams::new(2.0, 1.0)).unwrap();
        assert_abs_diff_eq!(b, 4.0, epsilon = 1e-8);
        // ln(tan(s/2)/s) antiderivative: ∫_0^{π/2} csc s − 1/s ds = ln(4/π).
        let b = circle_bound(EnergyParams::new(1.0, 1.0)).unwrap();
        assert_abs_diff_eq!(b, 4.0 * PI * (4.0 / PI).ln(), epsilon = 1e-6);
        assert!(matches!(
            circle_bound(EnergyParams::new(2.5, 2.0)),
            Err(Error::ParameterDomain(_))
        ));
        // singular but integrable: (2 − j)p = −0.8
        let b = circle_bound(EnergyParams::new(2.4, 2.0)).unwrap();
        assert!(b.is_finite() && b > 0.0);
    }

    #[test]
    fn renormalization_energy_examples() {
        let c = make_circle(512).unwrap();
        let sq = ChordKernel::new(|x, _| x * x);
        let v = renormalization_energy(&c, &sq).unwrap();
        // ∬ 4 sin²((s−t)/2) = 2π · 4π
        assert_abs_diff_eq!(v, 8.0 * PI * PI, epsilon = 0.01);

        let one = ChordKernel::new(|_, _| 1.0);
        let v = renormalization_energy(&c, &one).unwrap();
        assert_abs_diff_eq!(v, TAU * TAU * 511.0 / 512.0, epsilon = 1e-10);

        let c = make_circle(1024).unwrap();
        let params = EnergyParams::new(2.0, 1.0);
        let a = renormalization_energy(&c, &ChordKernel::ohara(params)).unwrap();
        let b = energy(&c, params).unwrap();
        assert_eq!(a, b);
        let k = ChordKernel::new(|x, y| x.powi(-2) - y.powi(-2));
        let a = renormalization_energy(&c, &k).unwrap();
        assert!((a - b).abs() <= 1e-9 * b.abs());
    }

    #[test]
    fn kernel_singularity_reports_pair() {
        let s = make_double_segment(32).unwrap();
        let k = ChordKernel::new(|x, _| 1.0 / x);
        match renormalization_energy(&s, &k) {
            Err(Error::KernelSingularity { i, k, .. }) => {
                assert_eq!(s.chord(i, (k + 32 - i) % 32), 0.0)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn kernel_flags_are_spot_checked() {
        assert!(ChordKernel::ohara(EnergyParams::new(2.0, 1.0)).check_flags().is_ok());
        assert!(ChordKernel::ohara(EnergyParams::new(1.0, 2.0)).check_flags().is_ok());
        let wrong = ChordKernel::new(|x, _| x).with_flags(true, false);
        assert!(matches!(wrong.check_flags(), Err(Error::KernelFlagViolation(_))));
        let concave = ChordKernel::new(|x, y| -(x / y).powi(4)).with_flags(true, true);
        assert!(concave.check_flags().is_err());
    }

    #[test]
    fn avg_chord_power_closed_forms() {
        let c = make_circle(512).unwrap();
        assert_abs_diff_eq!(avg_chord_power(&c, 1.0).unwrap(), 4.0 / PI, epsilon = 1e-4);
        assert_abs_diff_eq!(avg_chord_power(&c, 2.0).unwrap(), 2f64.sqrt(), epsilon = 1e-4);
        let s = make_double_segment(512).unwrap();
        let expected = PI * (1.0f64 / 15.0).powf(0.25);
        assert_abs_diff_eq!(avg_chord_power(&s, 4.0).unwrap(), expected, epsilon = 1e-3);
        // mean |x − y| over [0, π]²
        let s = make_double_segment(256).unwrap();
        assert_abs_diff_eq!(avg_chord_power(&s, 1.0).unwrap(), PI / 3.0, epsilon = 1e-3);
        assert!(avg_chord_power(&s, 0.0).is_err());
    }

    #[test]
    fn avg_chord_power_riemann_error_is_second_order() {
        let exact = 4.0 / PI;
        let e1 = (avg_chord_power(&make_circle(128).unwrap(), 1.0).unwrap() - exact).abs();
        let e2 = (avg_chord_power(&make_circle(256).unwrap(), 1.0).unwrap() - exact).abs();
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn circle_and_segment_closed_forms_match_known_values() {
        assert_abs_diff_eq!(circle_avg_chord_power(4.0), 6f64.powf(0.25), epsilon = 1e-12);
        assert_abs_diff_eq!(circle_avg_chord_power(2.0), 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(segment_avg_chord_power(4.0), 1.596_346_108_650_93, epsilon = 1e-12);
    }

    #[test]
    fn crossover_brackets() {
        let g = |p: f64| segment_avg_chord_power(p) - circle_avg_chord_power(p);
        assert!(g(2.0) < 0.0);
        assert!(g(4.0) > 0.0);
        assert_abs_diff_eq!(crossover_segment_circle(), 3.5721, epsilon = 5e-4);
    }

    #[test]
    fn distortion_examples() {
        let c = make_circle(512).unwrap();
        assert_abs_diff_eq!(distortion(&c), PI / 2.0, epsilon = 1e-3);
        let s = make_double_segment(64).unwrap();
        assert_eq!(distortion(&s), f64::INFINITY);
        for seed in 0..3 {
            let r = random_closed_curve(seed, 5, 0.6, 256, 3).unwrap();
            let half = ArcSeparation::from_steps(128, 256).unwrap();
            assert!(distortion_at(&r, half) >= PI / 2.0);
            assert!(distortion(&r) >= PI / 2.0);
        }
    }

    #[test]
    fn chord_average_examples() {
        let c = make_circle(512).unwrap();
        let half = ArcSeparation::from_steps(256, 512).unwrap();
        assert_abs_diff_eq!(chord_average(&c, half, |x| x), 4.0, epsilon = 1e-4);
        let quarter = ArcSeparation::from_steps(128, 512).unwrap();
        assert_abs_diff_eq!(chord_average(&c, quarter, f64::sqrt), 2f64.sqrt(), epsilon = 1e-4);
        let r = random_closed_curve(7, 6, 0.6, 512, 3).unwrap();
        assert!(chord_average(&r, half, f64::sqrt) <= 2.0);
    }

    #[test]
    fn avg_chord_power_is_monotone_in_p() {
        let r = random_closed_curve(3, 4, 0.5, 128, 2).unwrap();
        let values: Vec<f64> = [0.5, 1.0, 2.0, 3.0, 4.0]
            .iter()
            .map(|&p| avg_chord_power(&r, p).unwrap())
            .collect();
        assert!(values.windows(2).all(|w| w[0] <= w[1]), "{values:?}");
    }
}
