//! Closed polygons approximating unit-speed curves of length 2π.
//!
//! A [`PolyCurve`] stores `N` vertices on the implicit parameter grid
//! `t_i = 2πi/N`. Constructors return equilateral polygons of perimeter 2π
//! (the discrete unit-speed condition). Planar curves are stored with a zero
//! third coordinate and `dim == 2`.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = Vector3<f64>;

/// Smallest vertex count accepted by the constructors.
pub const MIN_VERTICES: usize = 8;

/// Relative tolerance on the perimeter after normalization.
pub const PERIMETER_RTOL: f64 = 1e-9;

/// Relative spread allowed between the longest and shortest edge.
pub const EDGE_SPREAD_RTOL: f64 = 1e-6;

/// A closed polygon in R² or R³ with cyclic vertex indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCurve {
    dim: usize,
    vertices: Vec<Point>,
}

impl PolyCurve {
    /// Builds a curve and checks the unit-speed invariants (equal edges, perimeter 2π).
    pub fn new(dim: usize, vertices: Vec<Point>) -> Result<Self> {
        let curve = Self::from_vertices(dim, vertices)?;
        curve.check_unit_speed()?;
        Ok(curve)
    }

    /// Builds a closed sample loop without the unit-speed checks.
    ///
    /// Used for curves sampled on a non-arclength parameter, e.g. the uniform
    /// parameterization `a0 + cos(t) a + sin(t) b` of an ellipse.
    pub fn from_vertices(dim: usize, mut vertices: Vec<Point>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidCurve(format!("dimension {dim} not in {{2, 3}}")));
        }
        if vertices.len() < 3 {
            return Err(Error::InvalidDiscretization(format!(
                "{} vertices cannot form a closed curve",
                vertices.len()
            )));
        }
        if let Some(i) = vertices.iter().position(|v| !v.iter().all(|x| x.is_finite())) {
            return Err(Error::InvalidCurve(format!("vertex {i} is not finite")));
        }
        if dim == 2 {
            if let Some(i) = vertices.iter().position(|v| v.z != 0.0) {
                return Err(Error::InvalidCurve(format!(
                    "planar curve has non-zero z at vertex {i}"
                )));
            }
        }
        vertices.shrink_to_fit();
        Ok(Self { dim, vertices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Point> {
        self.vertices
    }

    /// Vertex `i` with cyclic indexing (`i` and `i + N` are the same point).
    #[inline]
    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i % self.vertices.len()]
    }

    /// Parameter step `2π/N`.
    #[inline]
    pub fn step(&self) -> f64 {
        TAU / self.n() as f64
    }

    pub fn edge(&self, i: usize) -> Point {
        self.vertex(i + 1) - self.vertex(i)
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.edge(i).norm()).collect()
    }

    pub fn perimeter(&self) -> f64 {
        crate::reduce::pairwise_sum(&self.edge_lengths())
    }

    /// `(max - min) / mean` over the edge lengths.
    pub fn edge_spread(&self) -> f64 {
        let lengths = self.edge_lengths();
        let (lo, hi) = lengths
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &l| (lo.min(l), hi.max(l)));
        let mean = crate::reduce::pairwise_sum(&lengths) / lengths.len() as f64;
        if mean > 0.0 {
            (hi - lo) / mean
        } else {
            f64::INFINITY
        }
    }

    /// Largest angle between consecutive edges, in radians. Roughly the
    /// maximum curvature times the edge length.
    pub fn max_turning_angle(&self) -> f64 {
        (0..self.n())
            .map(|i| {
                let (a, b) = (self.edge(i), self.edge(i + 1));
                let norms = a.norm() * b.norm();
                if norms > 0.0 {
                    a.cross(&b).norm().atan2(a.dot(&b))
                } else {
                    PI
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn centroid(&self) -> Point {
        let mut c = Point::zeros();
        for v in &self.vertices {
            c += v;
        }
        c / self.n() as f64
    }

    /// Checks the discrete unit-speed invariants.
    pub fn check_unit_speed(&self) -> Result<()> {
        if self.n() < MIN_VERTICES {
            return Err(Error::InvalidDiscretization(format!(
                "{} vertices, need at least {MIN_VERTICES}",
                self.n()
            )));
        }
        let perimeter = self.perimeter();
        if ((perimeter - TAU) / TAU).abs() > PERIMETER_RTOL {
            return Err(Error::InvalidCurve(format!(
                "perimeter {perimeter} differs from 2π"
            )));
        }
        let spread = self.edge_spread();
        if spread > EDGE_SPREAD_RTOL {
            return Err(Error::InvalidCurve(format!(
                "edge lengths spread {spread:e} exceeds {EDGE_SPREAD_RTOL:e}"
            )));
        }
        Ok(())
    }

    pub fn is_unit_speed(&self) -> bool {
        self.check_unit_speed().is_ok()
    }

    pub fn translated(&self, offset: &Point) -> Self {
        let offset = if self.dim == 2 {
            Point::new(offset.x, offset.y, 0.0)
        } else {
            *offset
        };
        self.map_vertices(|v| v + offset)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map_vertices(|v| v * factor)
    }

    /// Rotation about the z axis.
    pub fn rotated_z(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        self.map_vertices(|v| Point::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z))
    }

    /// Same curve with the vertex order rotated so that old vertex `start` becomes vertex 0.
    pub fn reindexed(&self, start: usize) -> Self {
        let n = self.n();
        let vertices = (0..n).map(|i| self.vertex(start + i)).collect();
        Self {
            dim: self.dim,
            vertices,
        }
    }

    /// Same trace traversed in the opposite direction, keeping vertex 0.
    pub fn reversed(&self) -> Self {
        let n = self.n();
        let vertices = (0..n).map(|i| self.vertex(n - i)).collect();
        Self {
            dim: self.dim,
            vertices,
        }
    }

    pub(crate) fn map_vertices(&self, f: impl Fn(&Point) -> Point) -> Self {
        Self {
            dim: self.dim,
            vertices: self.vertices.iter().map(f).collect(),
        }
    }

    pub(crate) fn with_vertices(&self, vertices: Vec<Point>) -> Self {
        Self {
            dim: self.dim,
            vertices,
        }
    }

    /// Euclidean distance between vertices `i` and `i + k`.
    #[inline]
    pub fn chord(&self, i: usize, k: usize) -> f64 {
        (self.vertex(i + k) - self.vertex(i)).norm()
    }

    /// Distance along the curve between vertices `i` and `i + k`, `min(kΔ, 2π − kΔ)`.
    #[inline]
    pub fn arc_distance(&self, k: usize) -> f64 {
        let n = self.n();
        let k = k % n;
        k.min(n - k) as f64 * self.step()
    }

    /// Smallest distance between two vertices with distinct indices.
    pub fn min_vertex_distance(&self) -> f64 {
        let n = self.n();
        crate::reduce::rows(n, |i| {
            ((i + 1)..n)
                .map(|k| (self.vertices[k] - self.vertices[i]).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CurveFile::from(self))?)
    }

    /// Parses the curve file format and checks the unit-speed invariants.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: CurveFile = serde_json::from_str(text)?;
        file.into_curve()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }
}

/// On-disk curve format: `{"dim": d, "n": N, "vertices": [[x, y(, z)], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    pub dim: usize,
    pub n: usize,
    pub vertices: Vec<Vec<f64>>,
}

impl From<&PolyCurve> for CurveFile {
    fn from(curve: &PolyCurve) -> Self {
        let vertices = curve
            .vertices()
            .iter()
            .map(|v| v.iter().take(curve.dim()).copied().collect())
            .collect();
        Self {
            dim: curve.dim(),
            n: curve.n(),
            vertices,
        }
    }
}

impl CurveFile {
    pub fn into_curve(self) -> Result<PolyCurve> {
        if self.n != self.vertices.len() {
            return Err(Error::InvalidCurve(format!(
                "header says n = {} but {} vertices are listed",
                self.n,
                self.vertices.len()
            )));
        }
        let dim = self.dim;
        let vertices = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| match (dim, v.as_slice()) {
                (2, [x, y]) => Ok(Point::new(*x, *y, 0.0)),
                (3, [x, y, z]) => Ok(Point::new(*x, *y, *z)),
                _ => Err(Error::InvalidCurve(format!(
                    "vertex {i} has {} coordinates, expected {dim}",
                    v.len()
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        PolyCurve::new(dim, vertices)
    }
}

/// A grid separation `s = 2πk/N` with `0 < s < 2π`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArcSeparation {
    steps: usize,
    n: usize,
}

impl ArcSeparation {
    pub fn from_steps(steps: usize, n: usize) -> Result<Self> {
        if steps == 0 || steps >= n {
            return Err(Error::Precondition(format!(
                "separation of {steps} steps is not in (0, 2π) on a grid of {n}"
            )));
        }
        Ok(Self { steps, n })
    }

    /// Snaps an arclength onto the grid; fails if `s` is not a grid value.
    pub fn from_arclength(s: f64, n: usize) -> Result<Self> {
        let k = s / (TAU / n as f64);
        let rounded = k.round();
        if (k - rounded).abs() > 1e-9 * k.abs().max(1.0) || rounded < 1.0 {
            return Err(Error::Precondition(format!(
                "arclength {s} is not on the grid 2πk/{n}"
            )));
        }
        Self::from_steps(rounded as usize, n)
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn grid(&self) -> usize {
        self.n
    }

    pub fn arclength(&self) -> f64 {
        TAU * self.steps as f64 / self.n as f64
    }

    /// Distance along the curve, `min(s, 2π − s)`.
    pub fn arc_distance(&self) -> f64 {
        TAU * self.steps.min(self.n - self.steps) as f64 / self.n as f64
    }
}

/// Chord subtended by an arc of length `s` on the unit circle, `2 sin(s/2)`.
#[inline]
pub fn lambda_chord(s: f64) -> f64 {
    2.0 * (0.5 * s).sin()
}

/// Circumradius of the regular `n`-gon with perimeter 2π.
#[inline]
pub fn regular_radius(n: usize) -> f64 {
    let h = PI / n as f64;
    h / h.sin()
}

/// Chord between vertices `k` steps apart on the regular `n`-gon of perimeter 2π.
///
/// This is the discrete counterpart of [`lambda_chord`]: among equilateral
/// `n`-gons of perimeter 2π the mean squared vertex chord at separation `k` is
/// largest for the regular one.
#[inline]
pub fn regular_chord(k: usize, n: usize) -> f64 {
    2.0 * regular_radius(n) * (PI * k as f64 / n as f64).sin()
}

fn check_count(n: usize) -> Result<()> {
    if n < MIN_VERTICES {
        return Err(Error::InvalidDiscretization(format!(
            "{n} vertices, need at least {MIN_VERTICES}"
        )));
    }
    Ok(())
}

/// Regular `n`-gon of perimeter 2π centered at the origin, vertex 0 on the positive x axis.
pub fn make_circle(n: usize) -> Result<PolyCurve> {
    check_count(n)?;
    let r = regular_radius(n);
    let vertices = (0..n)
        .map(|i| {
            let t = TAU * i as f64 / n as f64;
            Point::new(r * t.cos(), r * t.sin(), 0.0)
        })
        .collect();
    Ok(PolyCurve { dim: 2, vertices })
}

/// Equilateral polygon inscribed in an ellipse with semi-axes `axis_ratio : 1`
/// (major axis along x), scaled to perimeter 2π.
///
/// This is the arclength parameterization of the ellipse, not the uniform
/// angle parameterization `cos(t) a + sin(t) b`.
pub fn make_ellipse(axis_ratio: f64, n: usize) -> Result<PolyCurve> {
    check_count(n)?;
    if !(axis_ratio >= 1.0) || !axis_ratio.is_finite() {
        return Err(Error::Precondition(format!(
            "axis ratio {axis_ratio} must be a finite value >= 1"
        )));
    }
    let trace = |t: f64| Point::new(axis_ratio * t.cos(), t.sin(), 0.0);
    let vertices = inscribe_parametric(&trace, n, 64)?;
    normalize(2, vertices, false)
}

/// The closed curve running along a segment of length π and back.
pub fn make_double_segment(n: usize) -> Result<PolyCurve> {
    check_count(n)?;
    if n % 2 != 0 {
        return Err(Error::InvalidDiscretization(format!(
            "double segment needs an even vertex count, got {n}"
        )));
    }
    let h = TAU / n as f64;
    let vertices = (0..n)
        .map(|i| {
            let x = if i <= n / 2 {
                h * i as f64
            } else {
                h * (n - i) as f64
            };
            Point::new(x, 0.0, 0.0)
        })
        .collect();
    Ok(PolyCurve { dim: 2, vertices })
}

/// Trigonometric trace `Σ_k A_k cos(kt) + B_k sin(kt)`.
struct TrigTrace {
    coeffs: Vec<(Point, Point)>,
}

impl TrigTrace {
    fn draw(seed: u64, stream: u64, max_harmonic: usize, decay: f64, dim: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut coeffs = Vec::with_capacity(max_harmonic);
        for k in 1..=max_harmonic {
            let scale = decay.powi(k as i32 - 1);
            let mut draw = || {
                let mut v = Point::zeros();
                for c in v.iter_mut().take(dim) {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    *c = scale * g;
                }
                v
            };
            let a = draw();
            let b = draw();
            coeffs.push((a, b));
        }
        Self { coeffs }
    }

    /// Position and its first two derivatives at `t`.
    fn jet(&self, t: f64) -> [Point; 3] {
        let mut out = [Point::zeros(); 3];
        for (j, (a, b)) in self.coeffs.iter().enumerate() {
            let k = (j + 1) as f64;
            let (s, c) = (k * t).sin_cos();
            out[0] += a * c + b * s;
            out[1] += (b * c - a * s) * k;
            out[2] -= (a * c + b * s) * (k * k);
        }
        out
    }

    fn at(&self, t: f64) -> Point {
        self.jet(t)[0]
    }

    fn length(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|i| {
                let t0 = TAU * i as f64 / samples as f64;
                let t1 = TAU * (i + 1) as f64 / samples as f64;
                (self.at(t1) - self.at(t0)).norm()
            })
            .sum()
    }

    /// Largest curvature `|c' × c''| / |c'|³` over `samples` parameters.
    fn max_curvature(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|i| {
                let [_, d1, d2] = self.jet(TAU * i as f64 / samples as f64);
                let speed = d1.norm();
                if speed > 0.0 {
                    d1.cross(&d2).norm() / speed.powi(3)
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Random smooth closed curve `Σ_{k=1..K} A_k cos(kt) + B_k sin(kt)`, with
/// Gaussian coefficient vectors scaled by `decay^k`, resampled to `n` equal
/// edges, perimeter 2π and centroid at the origin.
///
/// Deterministic per `seed`. A sample whose perimeter collapses is redrawn from
/// the next ChaCha stream.
pub fn random_closed_curve(
    seed: u64,
    max_harmonic: usize,
    decay: f64,
    n: usize,
    dim: usize,
) -> Result<PolyCurve> {
    check_count(n)?;
    if max_harmonic < 1 {
        return Err(Error::Precondition("max harmonic must be at least 1".into()));
    }
    if dim != 2 && dim != 3 {
        return Err(Error::Precondition(format!("dimension {dim} not in {{2, 3}}")));
    }
    for stream in 0u64.. {
        let trace = TrigTrace::draw(seed, stream, max_harmonic, decay, dim);
        if trace.length(64 * n) < 1e-6 {
            log::debug!("seed {seed} stream {stream}: degenerate sample, redrawing");
            continue;
        }
        match inscribe_parametric(&|t| trace.at(t), n, 16) {
            Ok(vertices) => return normalize(dim, vertices, true),
            Err(e) => log::debug!("seed {seed} stream {stream}: {e}, redrawing"),
        }
    }
    unreachable!("stream counter exhausted")
}

/// A [`random_closed_curve`] whose edges turn by at most `max_turn` radians,
/// so that the polygon resolves every bend of the trace. Candidates are drawn
/// from seeds derived from `seed`; each is screened by the curvature of its
/// trace before it is resampled.
pub fn random_resolved_curve(
    seed: u64,
    max_harmonic: usize,
    decay: f64,
    n: usize,
    dim: usize,
    max_turn: f64,
) -> Result<PolyCurve> {
    check_count(n)?;
    if !(max_turn > 0.0) {
        return Err(Error::Precondition(format!("turning bound {max_turn} must be positive")));
    }
    for attempt in 0..100_000u64 {
        let candidate = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(attempt);
        let trace = TrigTrace::draw(candidate, 0, max_harmonic, decay, dim);
        // after scaling to length 2π an edge turns by about κ·L/n
        let predicted = trace.max_curvature(4096) * trace.length(4096) / n as f64;
        if !(predicted <= max_turn) {
            continue;
        }
        let curve = random_closed_curve(candidate, max_harmonic, decay, n, dim)?;
        if curve.max_turning_angle() <= max_turn {
            return Ok(curve);
        }
    }
    Err(Error::Precondition(format!(
        "no random curve with {n} vertices turns by less than {max_turn} per edge"
    )))
}

/// Resamples the polygonal trace at `m` points with equal chords and rescales
/// the perimeter to 2π. Vertex 0 is kept in place before scaling.
pub fn resample_arclength(curve: &PolyCurve, m: usize) -> Result<PolyCurve> {
    check_count(m)?;
    let vertices = inscribe_polyline(curve.vertices(), m)?;
    normalize(curve.dim(), vertices, false)
}

fn normalize(dim: usize, vertices: Vec<Point>, center: bool) -> Result<PolyCurve> {
    let curve = PolyCurve::from_vertices(dim, vertices)?;
    let perimeter = curve.perimeter();
    if !(perimeter > 1e-12) {
        return Err(Error::InvalidCurve("curve collapsed to a point".into()));
    }
    let mut curve = curve.scaled(TAU / perimeter);
    if center {
        let c = curve.centroid();
        curve = curve.translated(&(-c));
    }
    Ok(curve)
}

const CLOSURE_RTOL: f64 = 1e-10;

/// Solves for the chord length `ℓ` such that `m` chord steps of length `ℓ`
/// along a closed trace of length `total` return exactly to the start.
///
/// `walk(ℓ)` returns the unwrapped trace position reached after `m` steps and
/// the positions of the first `m` points.
fn solve_closing_chord<W>(total: f64, m: usize, mut walk: W) -> Result<Vec<Point>>
where
    W: FnMut(f64) -> (f64, Vec<Point>),
{
    let residual = |walk: &mut W, l: f64| {
        let (end, pts) = walk(l);
        (end - total, pts)
    };
    let mut hi = total / m as f64;
    let (mut f_hi, mut pts_hi) = residual(&mut walk, hi);
    // chords never exceed arcs, so the residual at ℓ = L/m is non-negative up
    // to round-off and vanishes only for an already equilateral input
    if f_hi.abs() <= 1e-14 * total || (f_hi < 0.0 && -f_hi <= CLOSURE_RTOL * total) {
        return Ok(pts_hi);
    }
    let mut lo = 0.5 * hi;
    let (mut f_lo, _) = residual(&mut walk, lo);
    let mut guard = 0;
    while f_lo >= 0.0 {
        hi = lo;
        f_hi = f_lo;
        lo *= 0.5;
        f_lo = residual(&mut walk, lo).0;
        guard += 1;
        if guard > 60 {
            return Err(Error::InvalidCurve("could not bracket the closing chord".into()));
        }
    }
    if f_hi < 0.0 {
        return Err(Error::InvalidCurve("could not bracket the closing chord".into()));
    }
    // Illinois false position on the bracket [lo, hi].
    let mut side = 0i32;
    for _ in 0..200 {
        let mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        let mid = if mid > lo && mid < hi { mid } else { 0.5 * (lo + hi) };
        let (f_mid, pts) = residual(&mut walk, mid);
        if f_mid.abs() <= 1e-14 * total {
            return Ok(pts);
        }
        if (hi - lo) <= 4.0 * f64::EPSILON * hi {
            return if f_mid.abs() <= CLOSURE_RTOL * total {
                Ok(pts)
            } else {
                Err(Error::InvalidCurve(format!(
                    "equal-chord inscription does not close (gap {f_mid:e})"
                )))
            };
        }
        if f_mid > 0.0 {
            hi = mid;
            f_hi = f_mid;
            pts_hi = pts;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        } else {
            lo = mid;
            f_lo = f_mid;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        }
    }
    if f_hi.abs() <= CLOSURE_RTOL * total {
        Ok(pts_hi)
    } else {
        Err(Error::InvalidCurve("equal-chord inscription did not converge".into()))
    }
}

/// Equal-chord inscription on a closed polyline; vertex 0 of the output is vertex 0 of `poly`.
fn inscribe_polyline(poly: &[Point], m: usize) -> Result<Vec<Point>> {
    let n = poly.len();
    let seg_len: Vec<f64> = (0..n).map(|j| (poly[(j + 1) % n] - poly[j]).norm()).collect();
    let total: f64 = seg_len.iter().sum();
    if !(total > 1e-12) {
        return Err(Error::InvalidCurve("curve collapsed to a point".into()));
    }
    let mut cumulative = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    cumulative.push(0.0);
    for l in &seg_len {
        acc += l;
        cumulative.push(acc);
    }
    let walk = |l: f64| {
        let l2 = l * l;
        let mut pts = Vec::with_capacity(m);
        // current position: segment index (unwrapped) and local parameter
        let mut seg = 0usize;
        let mut tau = 0.0f64;
        let mut current = poly[0];
        pts.push(current);
        let limit = 2 * n;
        for step in 1..=m {
            let mut found = false;
            while seg < limit {
                let a = poly[seg % n];
                let b = poly[(seg + 1) % n];
                let d = b - a;
                // A vertex at distance exactly ℓ followed by a turn of more than
                // 90° touches the sphere from inside; the relative slack keeps
                // round-off from skipping it, which would break idempotence.
                if (b - current).norm_squared() >= l2 * (1.0 - 1e-10) && seg_len[seg % n] > 0.0 {
                    // q(τ) = |a − c + τ d|² is convex with q(τ_start) < ℓ² ≤ q(1):
                    // the crossing is the larger root.
                    let w = a - current;
                    let qa = d.norm_squared();
                    let qb = 2.0 * w.dot(&d);
                    let qc = w.norm_squared() - l2;
                    let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
                    let root = (-qb + disc.sqrt()) / (2.0 * qa);
                    tau = root.clamp(tau, 1.0);
                    current = a + d * tau;
                    found = true;
                    break;
                }
                seg += 1;
                tau = 0.0;
            }
            if !found {
                return (f64::INFINITY, pts);
            }
            if step < m {
                pts.push(current);
            }
        }
        let wraps = (seg / n) as f64 * total;
        let end = wraps + cumulative[seg % n] + tau * seg_len[seg % n];
        (end, pts)
    };
    solve_closing_chord(total, m, walk)
}

/// Equal-chord inscription on a closed parametric trace of period 2π starting at `trace(0)`.
///
/// Crossings are bracketed by marching `oversample * m` uniform parameter
/// samples and refined by bisection.
fn inscribe_parametric<F>(trace: &F, m: usize, oversample: usize) -> Result<Vec<Point>>
where
    F: Fn(f64) -> Point,
{
    let fine = oversample * m;
    let h = TAU / fine as f64;
    let samples: Vec<Point> = (0..fine).map(|i| trace(h * i as f64)).collect();
    let total: f64 = (0..fine)
        .map(|i| (samples[(i + 1) % fine] - samples[i]).norm())
        .sum();
    if !(total > 1e-12) {
        return Err(Error::InvalidCurve("curve collapsed to a point".into()));
    }
    // The trace position of a parameter is measured in parameter units scaled
    // by total/2π; the closing residual only needs a monotone coordinate.
    let scale = total / TAU;
    let walk = |l: f64| {
        let l2 = l * l;
        let mut pts = Vec::with_capacity(m);
        let mut t = 0.0f64;
        let mut current = samples[0];
        pts.push(current);
        let mut j = 0usize; // index of last fine sample at or before t
        let limit = 2 * fine;
        for step in 1..=m {
            let mut next = j + 1;
            while next < limit && (samples[next % fine] - current).norm_squared() < l2 {
                next += 1;
            }
            if next >= limit {
                return (f64::INFINITY, pts);
            }
            let mut lo = t.max(h * (next - 1) as f64);
            let mut hi = h * next as f64;
            for _ in 0..64 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if (trace(mid) - current).norm_squared() < l2 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            t = hi;
            j = next - 1;
            current = trace(t);
            if step < m {
                pts.push(current);
            }
        }
        (t * scale, pts)
    };
    solve_closing_chord(total, m, walk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn assert_unit_speed(c: &PolyCurve) {
        assert!(
            ((c.perimeter() - TAU) / TAU).abs() <= PERIMETER_RTOL,
            "perimeter {}",
            c.perimeter()
        );
        assert!(c.edge_spread() < EDGE_SPREAD_RTOL, "spread {}", c.edge_spread());
    }

    #[test]
    fn circle_rejects_small_counts() {
        assert!(matches!(make_circle(4), Err(Error::InvalidDiscretization(_))));
    }

    #[test]
    fn circle_is_regular_with_expected_radius() {
        let c = make_circle(256).unwrap();
        assert_unit_speed(&c);
        for l in c.edge_lengths() {
            assert_abs_diff_eq!(l, TAU / 256.0, epsilon = 1e-14);
        }
        let c = make_circle(256).unwrap();
        let r = (PI / 256.0) / (PI / 256.0).sin();
        let worst = c.vertices().iter().map(|v| (v.norm() - r).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-12);
        assert!(c.centroid().norm() < 1e-14);
    }

    #[test]
    fn unit_ratio_ellipse_is_the_circle() {
        let e = make_ellipse(1.0, 128).unwrap();
        let c = make_circle(128).unwrap();
        for (a, b) in e.vertices().iter().zip(c.vertices()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn ellipse_is_unit_speed_and_on_an_ellipse() {
        let e = make_ellipse(2.0, 512).unwrap();
        assert_unit_speed(&e);
        // vertex 0 sits on the major axis at (a, 0); b = a/2
        let a = e.vertex(0).x;
        let b = a / 2.0;
        assert!(e.vertex(0).y.abs() < 1e-15);
        for v in e.vertices() {
            let q = (v.x / a).powi(2) + (v.y / b).powi(2);
            assert!((q - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ellipse_rejects_ratio_below_one() {
        assert!(make_ellipse(0.5, 64).is_err());
    }

    #[test]
    fn double_segment_shape() {
        assert!(make_double_segment(255).is_err());
        let s = make_double_segment(256).unwrap();
        assert_unit_speed(&s);
        assert!(s.vertices().iter().all(|v| v.y == 0.0));
        let max = s.vertices().iter().map(|v| v.x).fold(0.0, f64::max);
        assert_abs_diff_eq!(max, PI, epsilon = 1e-12);
        assert_eq!(s.vertex(128).x, max);
        for i in 1..256 {
            // parameters t and 2π − t meet
            assert_eq!(s.chord(i, 256 - i + 256 - i), 0.0);
        }
    }

    #[test]
    fn random_curve_is_deterministic_and_normalized() {
        let a = random_closed_curve(7, 6, 0.6, 256, 3).unwrap();
        let b = random_closed_curve(7, 6, 0.6, 256, 3).unwrap();
        assert_eq!(a, b);
        assert_unit_speed(&a);
        assert!(a.centroid().norm() < 1e-12);
        let c = random_closed_curve(8, 6, 0.6, 256, 3).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_curve_with_one_harmonic_is_planar_ellipse() {
        let c = random_closed_curve(1, 1, 0.5, 128, 3).unwrap();
        assert_unit_speed(&c);
        // All vertices lie in the plane spanned by A_1 and B_1 through the centroid.
        let e0 = c.vertex(0);
        let e1 = c.vertex(32);
        let normal = e0.cross(&e1).normalize();
        for v in c.vertices() {
            assert!(v.dot(&normal).abs() < 1e-9);
        }
    }

    #[test]
    fn resample_fixed_point_and_halving() {
        let c = make_circle(256).unwrap();
        let r = resample_arclength(&c, 256).unwrap();
        for (a, b) in c.vertices().iter().zip(r.vertices()) {
            assert!((a - b).norm() < 1e-12, "{}", (a - b).norm());
        }
        let half = resample_arclength(&c, 128).unwrap();
        let regular = make_circle(128).unwrap();
        for (a, b) in half.vertices().iter().zip(regular.vertices()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn resample_equalizes_edges() {
        let e = make_ellipse(2.0, 512).unwrap();
        let r = resample_arclength(&e, 512).unwrap();
        assert!(r.edge_spread() < 1e-9);
        let rough = e.with_vertices(
            e.vertices()
                .iter()
                .enumerate()
                .map(|(i, v)| v * (1.0 + 0.01 * (i as f64 * 0.7).sin()))
                .collect(),
        );
        let r = resample_arclength(&rough, 300).unwrap();
        assert_eq!(r.n(), 300);
        assert_unit_speed(&r);
    }

    #[test]
    fn chord_and_arc_queries() {
        let c = make_circle(512).unwrap();
        assert_abs_diff_eq!(c.chord(0, 256), 2.0, epsilon = 1e-4);
        assert_abs_diff_eq!(c.chord(17, 128), 2f64.sqrt(), epsilon = 1e-4);
        assert_eq!(c.chord(5, 0), 0.0);
        assert_abs_diff_eq!(c.arc_distance(256), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(c.arc_distance(384), PI / 2.0, epsilon = 1e-15);
        assert_eq!(c.arc_distance(0), 0.0);
    }

    #[test]
    fn lambda_values() {
        assert_abs_diff_eq!(lambda_chord(PI), 2.0, epsilon = 1e-15);
        assert_eq!(lambda_chord(0.0), 0.0);
        assert_abs_diff_eq!(lambda_chord(PI / 2.0), 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn lambda_matches_inscribed_polygon() {
        for &n in &[16usize, 64, 512] {
            let c = make_circle(n).unwrap();
            let bound = 2.0 * (PI / n as f64).powi(2);
            for k in 0..n {
                let s = TAU * k as f64 / n as f64;
                assert!((lambda_chord(s) - c.chord(0, k)).abs() <= bound);
                assert_abs_diff_eq!(regular_chord(k, n), c.chord(0, k), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn arc_separation_grid() {
        let s = ArcSeparation::from_arclength(PI, 512).unwrap();
        assert_eq!(s.steps(), 256);
        assert!(ArcSeparation::from_arclength(1.0, 512).is_err());
        assert!(ArcSeparation::from_steps(0, 512).is_err());
        assert!(ArcSeparation::from_steps(512, 512).is_err());
        let s = ArcSeparation::from_steps(384, 512).unwrap();
        assert_abs_diff_eq!(s.arc_distance(), PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn json_checks_invariants_on_load() {
        let c = make_circle(64).unwrap();
        let text = c.to_json().unwrap();
        let back = PolyCurve::from_json(&text).unwrap();
        assert_eq!(back, c);

        let stretched = c.scaled(1.5);
        let err = PolyCurve::from_json(&stretched.to_json().unwrap()).unwrap_err();
        assert!(matches!(err, Error::InvalidCurve(_)));

        let bad = r#"{"dim": 2, "n": 9, "vertices": [[0, 0]]}"#;
        assert!(PolyCurve::from_json(bad).is_err());
        let unknown = r#"{"dim": 2, "n": 0, "vertices": [], "extra": 1}"#;
        assert!(matches!(PolyCurve::from_json(unknown), Err(Error::Json(_))));
    }

    #[test]
    fn chord_never_exceeds_arc_on_random_curves() {
        for seed in 0..5 {
            let c = random_closed_curve(seed, 5, 0.6, 128, 3).unwrap();
            for k in 0..128 {
                for i in (0..128).step_by(7) {
                    assert!(c.chord(i, k) <= c.arc_distance(k) * (1.0 + 1e-9) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn circle_turns_by_one_step() {
        let c = make_circle(128).unwrap();
        assert_abs_diff_eq!(c.max_turning_angle(), TAU / 128.0, epsilon = 1e-12);
        assert_abs_diff_eq!(make_double_segment(64).unwrap().max_turning_angle(), PI, epsilon = 1e-12);
    }

    #[test]
    fn resolved_curves_respect_the_turn_bound() {
        let a = random_resolved_curve(3, 6, 0.6, 512, 3, 0.2).unwrap();
        assert!(a.max_turning_angle() <= 0.2);
        assert_unit_speed(&a);
        let b = random_resolved_curve(3, 6, 0.6, 512, 3, 0.2).unwrap();
        assert_eq!(a, b);
        assert!(random_resolved_curve(3, 6, 0.6, 512, 3, 0.0).is_err());
    }
}
