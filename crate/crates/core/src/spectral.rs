//! Fourier coefficients of closed curves and the chord deficit
//! `ρ(s) = λ²(s) ∫|c'|² − ∫|c(t+s) − c(t)|²`.
//!
//! With `c(t) = Σ a_k e^{ikt}`,
//! `ρ(s) = 8π Σ_{k≥2} (k² sin²(s/2) − sin²(ks/2)) (|a_k|² + |a_{−k}|²)`,
//! which is non-negative term by term and vanishes identically exactly when
//! `a_k = 0` for `|k| ≥ 2`, i.e. for `c(t) = a_0 + cos(t) a + sin(t) b`.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::{lambda_chord, ArcSeparation, Point, PolyCurve};

/// One Fourier coefficient. Space curves use `a_k ∈ C^3`; planar curves are
/// expanded as the complex signal `x + iy` and keep `a_k` in slot 0.
pub type Coeff = [Complex64; 3];

const ZERO: Coeff = [Complex64::new(0.0, 0.0); 3];

fn norm_sqr(c: &Coeff) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum()
}

/// Fourier coefficients `a_k`, `|k| <= K`, of a closed curve on `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCurve {
    dim: usize,
    max_harmonic: usize,
    /// `coeffs[k + K] = a_k`
    coeffs: Vec<Coeff>,
}

impl FourierCurve {
    /// Builds a curve from coefficients listed for `k = −K..=K`.
    pub fn from_coeffs(dim: usize, coeffs: Vec<Coeff>) -> Result<Self> {
        if coeffs.len() % 2 == 0 {
            return Err(Error::Precondition(
                "coefficients must be listed for k = -K..=K".into(),
            ));
        }
        if dim != 2 && dim != 3 {
            return Err(Error::Precondition(format!("dimension {dim} not in {{2, 3}}")));
        }
        Ok(Self {
            dim,
            max_harmonic: coeffs.len() / 2,
            coeffs,
        })
    }

    /// DFT of the vertex samples with `K = ⌊N/2⌋ − 1`, normalized so that
    /// `(1/N) Σ |x_j|² = Σ |a_k|²` (Parseval with the `2π` factor moved out).
    pub fn analyze(curve: &PolyCurve) -> Self {
        Self::analyze_truncated(curve, curve.n() / 2 - 1)
    }

    pub fn analyze_truncated(curve: &PolyCurve, max_harmonic: usize) -> Self {
        let n = curve.n();
        let max_harmonic = max_harmonic.min((n - 1) / 2);
        let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
        let mut coeffs = vec![ZERO; 2 * max_harmonic + 1];
        // planar curves are read as complex signals x + iy
        let channels = if curve.dim() == 2 { 1 } else { 3 };
        for d in 0..channels {
            let mut buf: Vec<Complex64> = curve
                .vertices()
                .iter()
                .map(|v| {
                    if channels == 1 {
                        Complex64::new(v.x, v.y)
                    } else {
                        Complex64::new(v[d], 0.0)
                    }
                })
                .collect();
            fft.process(&mut buf);
            for (slot, k) in coeffs.iter_mut().zip(-(max_harmonic as isize)..) {
                let idx = k.rem_euclid(n as isize) as usize;
                slot[d] = buf[idx] / n as f64;
            }
        }
        Self {
            dim: curve.dim(),
            max_harmonic,
            coeffs,
        }
    }

    /// Random curve with `|a_k| ∝ decay^{|k|−1}` and `a_0 = 0`. Planar curves
    /// draw every `a_k` independently; in space `a_{−k} = conj(a_k)`.
    pub fn random(seed: u64, dim: usize, max_harmonic: usize, decay: f64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k_max = max_harmonic;
        let mut coeffs = vec![ZERO; 2 * k_max + 1];
        for k in 1..=k_max {
            let scale = decay.powi(k as i32 - 1);
            let mut draw = || {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im) * scale
            };
            if dim == 2 {
                coeffs[k_max + k][0] = draw();
                coeffs[k_max - k][0] = draw();
            } else {
                let a = [draw(), draw(), draw()];
                coeffs[k_max + k] = a;
                coeffs[k_max - k] = a.map(|z| z.conj());
            }
        }
        Self::from_coeffs(dim, coeffs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_harmonic(&self) -> usize {
        self.max_harmonic
    }

    /// `a_k`, zero outside `|k| <= K`.
    pub fn coeff(&self, k: isize) -> Coeff {
        let idx = k + self.max_harmonic as isize;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            ZERO
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn coeff_norm(&self, k: isize) -> f64 {
        norm_sqr(&self.coeff(k)).sqrt()
    }

    /// Reads a coefficient combination back as a point of space.
    fn to_point(&self, c: Coeff) -> Point {
        if self.dim == 2 {
            Point::new(c[0].re, c[0].im, 0.0)
        } else {
            Point::new(c[0].re, c[1].re, c[2].re)
        }
    }

    /// `a_0`, the mean of the curve.
    pub fn centroid(&self) -> Point {
        self.to_point(self.coeff(0))
    }

    /// `(a_0, a, b)` with `a = a_1 + a_{−1}` and `b = i(a_1 − a_{−1})`, the
    /// ellipse `a_0 + cos(t) a + sin(t) b` through the first harmonics.
    pub fn ellipse_part(&self) -> (Point, Point, Point) {
        let p = self.coeff(1);
        let m = self.coeff(-1);
        let i = Complex64::new(0.0, 1.0);
        let a = self.to_point([0, 1, 2].map(|d| p[d] + m[d]));
        let b = self.to_point([0, 1, 2].map(|d| i * (p[d] - m[d])));
        (self.centroid(), a, b)
    }

    /// `c(t) = Σ a_k e^{ikt}`.
    pub fn eval(&self, t: f64) -> Point {
        let mut acc = ZERO;
        for (slot, k) in self.coeffs.iter().zip(-(self.max_harmonic as isize)..) {
            let phase = Complex64::from_polar(1.0, k as f64 * t);
            for d in 0..3 {
                acc[d] += slot[d] * phase;
            }
        }
        self.to_point(acc)
    }

    /// Samples `c` at `t_j = 2πj/n`; the result is generally not unit speed.
    pub fn sample(&self, n: usize) -> Result<PolyCurve> {
        let vertices = (0..n)
            .map(|j| self.eval(TAU * j as f64 / n as f64))
            .collect();
        PolyCurve::from_vertices(self.dim, vertices)
    }

    /// `∫|c'|² = 2π Σ k² |a_k|²`.
    pub fn dirichlet_energy(&self) -> f64 {
        let k_max = self.max_harmonic as isize;
        TAU * (-k_max..=k_max)
            .map(|k| (k * k) as f64 * norm_sqr(&self.coeff(k)))
            .sum::<f64>()
    }

    /// `∫|c(t+s) − c(t)|² = 8π Σ sin²(ks/2) |a_k|²` summed over `k >= 1` pairs.
    pub fn mean_square_chord(&self, s: f64) -> f64 {
        let k_max = self.max_harmonic as isize;
        8.0 * PI
            * (1..=k_max)
                .map(|k| {
                    (0.5 * k as f64 * s).sin().powi(2)
                        * (norm_sqr(&self.coeff(k)) + norm_sqr(&self.coeff(-k)))
                })
                .sum::<f64>()
    }

    /// The truncated series for `ρ(s)`.
    pub fn deficit(&self, s: f64) -> f64 {
        let half = (0.5 * s).sin().powi(2);
        let k_max = self.max_harmonic as isize;
        8.0 * PI
            * (2..=k_max)
                .map(|k| {
                    let weight = (k * k) as f64 * half - (0.5 * k as f64 * s).sin().powi(2);
                    weight * (norm_sqr(&self.coeff(k)) + norm_sqr(&self.coeff(-k)))
                })
                .sum::<f64>()
    }

    /// `ρ` at `s = 2πk/n` for `k = 1..n−1`.
    pub fn deficit_profile(&self, n: usize) -> DeficitProfile {
        let samples = (1..n)
            .map(|k| {
                let s = TAU * k as f64 / n as f64;
                (s, self.deficit(s))
            })
            .collect();
        DeficitProfile {
            samples,
            scale: self.dirichlet_energy(),
        }
    }
}

/// Samples `(s, ρ(s))` of the chord deficit on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DeficitProfile {
    pub samples: Vec<(f64, f64)>,
    /// `L = ∫|c'|²`, the natural scale of `ρ`.
    pub scale: f64,
}

impl DeficitProfile {
    /// Round-off allowance `1e−8 · max(1, L)`.
    pub fn tolerance(&self) -> f64 {
        1e-8 * self.scale.max(1.0)
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().map(|&(_, r)| r).fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|&(_, r)| r.abs()).fold(0.0, f64::max)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.min() >= -self.tolerance()
    }

    /// Number of samples below the round-off allowance.
    pub fn violations(&self) -> usize {
        let tol = self.tolerance();
        self.samples.iter().filter(|&&(_, r)| r < -tol).count()
    }
}

/// `ρ(s)` computed on the polygon directly:
/// `λ²(s) Δ Σ |e_i/Δ|² − Δ Σ |x_{i+k} − x_i|²` with `Δ = 2π/N`.
pub fn direct_deficit(curve: &PolyCurve, sep: ArcSeparation) -> f64 {
    let n = curve.n();
    let h = curve.step();
    let k = sep.steps();
    let speed: Vec<f64> = (0..n).map(|i| curve.edge(i).norm_squared() / (h * h)).collect();
    let chords: Vec<f64> = (0..n)
        .map(|i| (curve.vertex(i + k) - curve.vertex(i)).norm_squared())
        .collect();
    let energy = h * crate::reduce::pairwise_sum(&speed);
    let chord = h * crate::reduce::pairwise_sum(&chords);
    lambda_chord(sep.arclength()).powi(2) * energy - chord
}

/// Direct deficit on every grid separation of the curve.
pub fn direct_profile(curve: &PolyCurve) -> DeficitProfile {
    let n = curve.n();
    let h = curve.step();
    let samples = (1..n)
        .map(|k| {
            let sep = ArcSeparation::from_steps(k, n).expect("k in 1..n");
            (sep.arclength(), direct_deficit(curve, sep))
        })
        .collect();
    let scale = (0..n).map(|i| curve.edge(i).norm_squared()).sum::<f64>() / h;
    DeficitProfile { samples, scale }
}

/// `(sin²(kθ), k² sin²θ)`; the first never exceeds the second for `k >= 2`,
/// with equality exactly at `θ ∈ πZ`.
pub fn trig_lemma(k: u32, theta: f64) -> Result<(f64, f64)> {
    if k < 2 {
        return Err(Error::Precondition(format!("k = {k} must be at least 2")));
    }
    let lhs = (k as f64 * theta).sin().powi(2);
    let rhs = (k * k) as f64 * theta.sin().powi(2);
    Ok((lhs, rhs))
}

/// Both sides of `|AC|² + |BD|² <= |BC|² + |AD|² + 2|AB||CD|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TetraCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`; zero exactly when `AB` and `DC` point the same way.
    pub gap: f64,
}

pub fn tetra_check(a: &Point, b: &Point, c: &Point, d: &Point) -> TetraCheck {
    let lhs = (c - a).norm_squared() + (d - b).norm_squared();
    let rhs = (c - b).norm_squared() + (d - a).norm_squared() + 2.0 * (b - a).norm() * (d - c).norm();
    TetraCheck {
        lhs,
        rhs,
        gap: rhs - lhs,
    }
}
