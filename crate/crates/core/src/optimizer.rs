//! Maximization of the average chord power `A_p` over closed planar
//! equilateral polygons of perimeter 2π.
//!
//! The ascent works on `F = A_p^p`. Each iteration takes the L² gradient
//! (vertex gradient divided by the parameter step), projects it onto the
//! tangent space of the equal-edge constraint set, moves along it and
//! retracts with an arclength resample. Step lengths come from a
//! Barzilai–Borwein estimate followed by halving until `F` does not decrease.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{avg_chord_power, COINCIDENT_TOL};
use crate::geometry::{make_circle, resample_arclength, Point, PolyCurve};
use crate::reduce::{pairwise_sum, rows};
use crate::shape::SweepRecord;

pub use crate::functionals::crossover_segment_circle;

/// Smallest discretization accepted by [`maximize`].
pub const MIN_N: usize = 32;

/// Vertex pairs closer than this make a trial step inadmissible.
pub const MIN_PAIR_DISTANCE: f64 = 1e-6;

const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeOptions {
    pub n: usize,
    pub max_iters: usize,
    /// First trial step, later replaced by Barzilai–Borwein estimates.
    pub step0: f64,
    /// Stop once the projected gradient has L² norm below this.
    pub tol_grad: f64,
    /// Amplitude of the mode-2 symmetry-breaking perturbation.
    pub perturb: f64,
    pub seed: u64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            n: 256,
            max_iters: 3000,
            step0: 0.05,
            tol_grad: 1e-7,
            perturb: 0.05,
            seed: 0,
        }
    }
}

impl OptimizeOptions {
    pub fn validate(&self) -> Result<()> {
        if self.n < MIN_N {
            return Err(Error::Precondition(format!("n = {} below {MIN_N}", self.n)));
        }
        if !(self.step0 > 0.0) || !(self.tol_grad > 0.0) {
            return Err(Error::Precondition("step0 and tol_grad must be positive".into()));
        }
        if !(self.perturb >= 0.0) {
            return Err(Error::Precondition("perturbation amplitude must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub value: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub curve: PolyCurve,
    /// `A_p` of `curve`.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<HistoryEntry>,
    /// Why the run stopped early, if it did.
    pub diagnostic: Option<String>,
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::ParameterDomain(format!("p = {p} must be positive")));
    }
    Ok(())
}

/// `A_p^p` and its vertex gradient in one pass over the pairs.
fn value_and_grad(curve: &PolyCurve, p: f64) -> Result<(f64, Vec<Point>)> {
    let n = curve.n();
    let half = 0.5 * p - 1.0;
    let per_row = rows(n, |m| {
        let xm = curve.vertex(m);
        let mut g = Point::zeros();
        let mut terms = Vec::with_capacity(n - 1);
        for k in 1..n {
            let d = xm - curve.vertex(m + k);
            let d2 = d.norm_squared();
            if d2 == 0.0 || d2.sqrt() < COINCIDENT_TOL {
                if p < 2.0 {
                    return Err(Error::SingularGradient { i: m, k: (m + k) % n, p });
                }
                terms.push(0.0);
                continue;
            }
            let w = d2.powf(half);
            g += d * w;
            terms.push(w * d2);
        }
        Ok((pairwise_sum(&terms), g))
    });
    let scale = 1.0 / (n * n) as f64;
    let mut sums = Vec::with_capacity(n);
    let mut grad = Vec::with_capacity(n);
    for row in per_row {
        let (s, g) = row?;
        sums.push(s);
        grad.push(g * (2.0 * p * scale));
    }
    Ok((pairwise_sum(&sums) * scale, grad))
}

/// `∂/∂x_m` of `(1/N²) Σ_{i,k} |x_i − x_k|^p`, i.e.
/// `(2p/N²) Σ_k |x_m − x_k|^{p−2} (x_m − x_k)`.
pub fn objective_grad(curve: &PolyCurve, p: f64) -> Result<Vec<Point>> {
    check_p(p)?;
    Ok(value_and_grad(curve, p)?.1)
}

/// Resamples to `N` equal edges, rescales to perimeter 2π and recenters.
pub fn project(curve: &PolyCurve) -> Result<PolyCurve> {
    if !(curve.perimeter() > 1e-6) {
        return Err(Error::DegenerateCurve { i: 0, k: 1 });
    }
    let resampled = resample_arclength(curve, curve.n())?;
    let c = resampled.centroid();
    Ok(resampled.translated(&(-c)))
}

/// Equilateral closed polygon with edge length `h` described by the
/// directions `θ_j` of its edges. Equal edges hold by construction; closing
/// the polygon leaves two constraints, `Σ cos θ_j = Σ sin θ_j = 0`.
struct AngleChart {
    h: f64,
    theta: Vec<f64>,
}

impl AngleChart {
    fn from_curve(curve: &PolyCurve) -> Result<Self> {
        let n = curve.n();
        let theta = (0..n)
            .map(|i| {
                let e = curve.edge(i);
                e.y.atan2(e.x)
            })
            .collect();
        let mut chart = Self { h: TAU / n as f64, theta };
        chart.close()?;
        Ok(chart)
    }

    fn closure(&self) -> (f64, f64) {
        let c: Vec<f64> = self.theta.iter().map(|t| t.cos()).collect();
        let s: Vec<f64> = self.theta.iter().map(|t| t.sin()).collect();
        (pairwise_sum(&c), pairwise_sum(&s))
    }

    /// Gram matrix of the closure gradients `(−sin θ, cos θ)`, returned as
    /// `(ss, sc, cc)`.
    fn gram(&self) -> (f64, f64, f64) {
        let (mut ss, mut sc, mut cc) = (0.0, 0.0, 0.0);
        for t in &self.theta {
            let (s, c) = t.sin_cos();
            ss += s * s;
            sc += s * c;
            cc += c * c;
        }
        (ss, sc, cc)
    }

    /// Minimal-norm Newton correction back onto the closed polygons.
    fn close(&mut self) -> Result<()> {
        let n = self.theta.len() as f64;
        for _ in 0..50 {
            let (cx, cy) = self.closure();
            if cx.hypot(cy) <= 1e-13 * n {
                return Ok(());
            }
            let (ss, sc, cc) = self.gram();
            // rows a = −sin θ, b = cos θ; solve [[ss, −sc], [−sc, cc]] ν = −(cx, cy)
            let det = ss * cc - sc * sc;
            if !(det.abs() > 1e-12 * n * n) {
                break;
            }
            let nu0 = (-cx * cc - cy * sc) / det;
            let nu1 = (-cy * ss - cx * sc) / det;
            for t in self.theta.iter_mut() {
                let (s, c) = t.sin_cos();
                *t += -nu0 * s + nu1 * c;
            }
        }
        Err(Error::InvalidCurve("edge directions do not close up".into()))
    }

    fn curve(&self) -> PolyCurve {
        let n = self.theta.len();
        let mut vertices = Vec::with_capacity(n);
        let mut x = Point::zeros();
        for t in &self.theta {
            vertices.push(x);
            let (s, c) = t.sin_cos();
            x += Point::new(c, s, 0.0) * self.h;
        }
        let center = vertices.iter().sum::<Point>() / n as f64;
        for v in vertices.iter_mut() {
            *v -= center;
            v.z = 0.0;
        }
        PolyCurve::from_vertices(2, vertices).expect("finite planar vertices")
    }

    /// L² gradient of `F` in the angles, projected onto the closure tangent space.
    ///
    /// With `x_i = x_0 + h Σ_{j<i} e_j`, `∂F/∂θ_j = h e_j^⊥ · Σ_{i>j} ∂F/∂x_i`.
    fn ascent_direction(&self, vertex_grad: &[Point]) -> Vec<f64> {
        let n = self.theta.len();
        let mut tail = Point::zeros();
        let mut dir = vec![0.0; n];
        for j in (0..n).rev() {
            let (s, c) = self.theta[j].sin_cos();
            dir[j] = -s * tail.x + c * tail.y;
            tail += vertex_grad[j];
        }
        let (ss, sc, cc) = self.gram();
        let (mut ga, mut gb) = (0.0, 0.0);
        for (d, t) in dir.iter().zip(&self.theta) {
            let (s, c) = t.sin_cos();
            ga -= s * d;
            gb += c * d;
        }
        let det = ss * cc - sc * sc;
        let nu0 = (ga * cc + gb * sc) / det;
        let nu1 = (gb * ss + ga * sc) / det;
        for (d, t) in dir.iter_mut().zip(&self.theta) {
            let (s, c) = t.sin_cos();
            *d -= -nu0 * s + nu1 * c;
        }
        dir
    }
}

/// Value, projected angle gradient and curve at a chart point.
fn evaluate(chart: &AngleChart, p: f64) -> Result<(f64, Vec<f64>, PolyCurve)> {
    let curve = chart.curve();
    let (value, grad) = value_and_grad(&curve, p)?;
    Ok((value, chart.ascent_direction(&grad), curve))
}

fn weighted_dot(a: &[f64], b: &[f64], h: f64) -> f64 {
    let terms: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    h * pairwise_sum(&terms)
}

/// Adds `amp · cos(2t + φ)` along the vertex normals (mode-2 deformation) and
/// projects back to the constraint set. `φ` is drawn from `seed`.
pub fn perturb(curve: &PolyCurve, amp: f64, seed: u64) -> Result<PolyCurve> {
    if curve.dim() != 2 {
        return Err(Error::Precondition("perturbation is defined for planar curves".into()));
    }
    let n = curve.n();
    let phase = ChaCha8Rng::seed_from_u64(seed).random_range(0.0..PI);
    let moved = (0..n)
        .map(|i| {
            let t = TAU * i as f64 / n as f64;
            let tangent = curve.vertex(i + 1) - curve.vertex(i + n - 1);
            let normal = Point::new(tangent.y, -tangent.x, 0.0) / tangent.norm().max(1e-300);
            curve.vertex(i) + normal * (amp * (2.0 * t + phase).cos())
        })
        .collect();
    project(&curve.with_vertices(moved))
}

/// Regular polygon with a mode-2 perturbation; the circle itself is a
/// critical point of `A_p` for every `p`.
pub fn perturbed_circle(n: usize, amp: f64, seed: u64) -> Result<PolyCurve> {
    perturb(&make_circle(n)?, amp, seed)
}

fn signed_area(curve: &PolyCurve) -> f64 {
    let terms: Vec<f64> = (0..curve.n())
        .map(|i| {
            let (a, b) = (curve.vertex(i), curve.vertex(i + 1));
            a.x * b.y - a.y * b.x
        })
        .collect();
    0.5 * pairwise_sum(&terms)
}

/// Quotients out rigid motions: centroid at the origin, principal axis along
/// x with `Σ x³ >= 0`, counterclockwise orientation, vertex 0 at maximal x.
pub fn canonicalize(curve: &PolyCurve) -> Result<PolyCurve> {
    if curve.dim() != 2 {
        return Err(Error::Precondition("canonical frames are defined for planar curves".into()));
    }
    let c = curve.centroid();
    let centered = curve.translated(&(-c));
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for v in centered.vertices() {
        sxx += v.x * v.x;
        sxy += v.x * v.y;
        syy += v.y * v.y;
    }
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let mut out = centered.rotated_z(-angle);
    let skew: f64 = out.vertices().iter().map(|v| v.x.powi(3)).sum();
    if skew < 0.0 {
        out = out.rotated_z(PI);
    }
    if signed_area(&out) < 0.0 {
        out = out.reversed();
    }
    let start = out
        .vertices()
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(best, x), (i, v)| if v.x > x { (i, v.x) } else { (best, x) })
        .0;
    let out = out.reindexed(start);
    // rotation leaves round-off in z-free coordinates only; snap exact zeros back
    PolyCurve::from_vertices(2, out.into_vertices())
}

/// Projected gradient ascent of `A_p` from `init` (planar, resampled to
/// `opts.n` vertices). The returned curve is canonicalized.
///
/// The iteration runs in edge-direction coordinates, where the equal-edge
/// constraint is built in and the stiffness of short-wavelength modes
/// does not grow with `N`.
pub fn maximize(p: f64, init: &PolyCurve, opts: &OptimizeOptions) -> Result<OptimizeResult> {
    check_p(p)?;
    opts.validate()?;
    if init.dim() != 2 {
        return Err(Error::Precondition("the ascent runs on planar curves".into()));
    }
    let mut chart = AngleChart::from_curve(&project(&resample_arclength(init, opts.n)?)?)?;
    let h = chart.h;
    let mut history = Vec::new();
    let mut diagnostic = None;
    let mut converged = false;
    let mut alpha = opts.step0;
    let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;

    let (mut value, mut dir, mut curve) = evaluate(&chart, p)?;
    let mut iteration = 0;
    loop {
        let grad_norm = weighted_dot(&dir, &dir, h).sqrt();
        history.push(HistoryEntry {
            iteration,
            value: value.powf(1.0 / p),
            grad_norm,
        });
        if grad_norm < opts.tol_grad {
            converged = true;
            break;
        }
        if iteration >= opts.max_iters {
            diagnostic = Some(format!("iteration limit {} reached", opts.max_iters));
            break;
        }

        if let Some((prev_theta, prev_dir)) = &previous {
            let s: Vec<f64> = chart.theta.iter().zip(prev_theta).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = prev_dir.iter().zip(&dir).map(|(a, b)| a - b).collect();
            let sy = weighted_dot(&s, &y, h);
            if sy > 0.0 {
                alpha = weighted_dot(&s, &s, h) / sy;
            } else {
                alpha *= 2.0;
            }
        }
        // cap the largest turn of an edge in one trial step
        let max_turn = dir.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        alpha = alpha.min(0.2 / max_turn);

        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let mut trial = AngleChart {
                h,
                theta: chart.theta.iter().zip(&dir).map(|(t, d)| t + alpha * d).collect(),
            };
            if trial.close().is_ok() {
                let candidate = trial.curve();
                if candidate.min_vertex_distance() >= MIN_PAIR_DISTANCE {
                    match evaluate(&trial, p) {
                        Ok((v, d, c)) if v >= value => {
                            accepted = Some((trial, v, d, c));
                            break;
                        }
                        Ok(_) => {}
                        Err(e) => log::debug!("trial step rejected: {e}"),
                    }
                }
            }
            alpha *= 0.5;
        }
        let Some((trial, v, d, c)) = accepted else {
            diagnostic = Some(format!(
                "no non-decreasing step after {MAX_HALVINGS} halvings (projected gradient {grad_norm:.3e})"
            ));
            break;
        };
        let old_theta = std::mem::replace(&mut chart, trial).theta;
        previous = Some((old_theta, std::mem::replace(&mut dir, d)));
        value = v;
        curve = c;
        iteration += 1;
    }

    let curve = canonicalize(&curve)?;
    let value = avg_chord_power(&curve, p)?;
    if let Some(last) = history.last_mut() {
        last.value = value;
    }
    Ok(OptimizeResult {
        curve,
        value,
        iterations: iteration,
        converged,
        history,
        diagnostic,
    })
}

/// Continuation over an ascending exponent grid. The first point starts from a
/// perturbed circle; every later one from the previous maximizer with a fresh
/// perturbation. Failed grid points are reported and the chain continues from
/// the last good curve.
pub fn sweep_curves(p_grid: &[f64], opts: &OptimizeOptions) -> Result<Vec<(SweepRecord, Option<PolyCurve>)>> {
    opts.validate()?;
    if p_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Precondition("exponent grid must be strictly ascending".into()));
    }
    let mut out = Vec::with_capacity(p_grid.len());
    let mut warm = make_circle(opts.n)?;
    for (idx, &p) in p_grid.iter().enumerate() {
        let seed = opts.seed.wrapping_add(idx as u64);
        let run = perturb(&warm, opts.perturb, seed)
            .and_then(|init| maximize(p, &init, opts))
            .and_then(|res| {
                let record = SweepRecord::measure(p, res.value, &res.curve, res.converged)?;
                Ok((record, res))
            });
        match run {
            Ok((record, res)) => {
                log::info!(
                    "p = {p:.4}: A_p = {:.10}, r = {:.5}, iterations = {}{}",
                    res.value,
                    record.r,
                    res.iterations,
                    if res.converged { "" } else { " (not converged)" }
                );
                warm = res.curve.clone();
                out.push((record, Some(res.curve)));
            }
            Err(e) => {
                log::warn!("p = {p}: {e}");
                out.push((SweepRecord::failed(p), None));
            }
        }
    }
    Ok(out)
}

pub fn sweep(p_grid: &[f64], opts: &OptimizeOptions) -> Result<Vec<SweepRecord>> {
    Ok(sweep_curves(p_grid, opts)?.into_iter().map(|(r, _)| r).collect())
}

/// First grid exponent whose width ratio exceeds `threshold`.
pub fn detect_transition(records: &[SweepRecord], threshold: f64) -> Option<f64> {
    records.iter().find(|r| r.r > threshold).map(|r| r.p)
}
