//! Shape diagnostics for planar curves: projection widths, algebraic conic
//! fits and a symmetric Hausdorff distance.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, PolyCurve};

/// Smallest number of projection directions accepted by [`width_ratio`].
pub const MIN_ANGLES: usize = 90;

fn require_planar(curve: &PolyCurve) -> Result<()> {
    if curve.dim() != 2 {
        return Err(Error::Precondition("shape diagnostics need a planar curve".into()));
    }
    Ok(())
}

/// Extent of the vertices along `(cos θ, sin θ)`.
pub fn width(curve: &PolyCurve, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let (lo, hi) = curve
        .vertices()
        .iter()
        .map(|v| c * v.x + s * v.y)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    hi - lo
}

/// Widest over narrowest projection for `θ_q = qπ/m`, `q = 0..m`.
/// Returns `f64::INFINITY` when some width vanishes.
pub fn width_ratio(curve: &PolyCurve, m_angles: usize) -> Result<f64> {
    require_planar(curve)?;
    if m_angles < MIN_ANGLES {
        return Err(Error::Precondition(format!(
            "{m_angles} projection angles, need at least {MIN_ANGLES}"
        )));
    }
    let (lo, hi) = (0..m_angles)
        .map(|q| width(curve, PI * q as f64 / m_angles as f64))
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), w| (lo.min(w), hi.max(w)));
    if lo < 1e-12 * hi.max(1.0) {
        return Ok(f64::INFINITY);
    }
    Ok(hi / lo)
}

/// Least-squares conic `a x² + b xy + c y² + d x + e y + f = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConicFit {
    /// `(a, b, c, d, e, f)` normalized so that `a² + b²/2 + c² + d² + e² + f² = 1`.
    /// The quadratic part enters through the Frobenius norm of its symmetric
    /// matrix, which makes the fit equivariant under rotations.
    pub coefficients: [f64; 6],
    /// Root-mean-square of the algebraic form over the vertices.
    pub residual: f64,
    /// `b² − 4ac < 0`.
    pub elliptic: bool,
    /// Present only for elliptic fits.
    pub eccentricity: Option<f64>,
    /// The design matrix had more than one null direction (e.g. collinear points).
    pub degenerate: bool,
}

impl ConicFit {
    pub fn residual_log10(&self) -> f64 {
        self.residual.log10()
    }
}

/// Algebraic conic fit: the right singular vector of the `N × 6` design matrix
/// belonging to its smallest singular value. The `xy` column is scaled by `√2`
/// so that the unit-norm constraint is rotation invariant.
pub fn fit_conic(curve: &PolyCurve) -> Result<ConicFit> {
    require_planar(curve)?;
    let n = curve.n();
    if n < 6 {
        return Err(Error::Precondition(format!("{n} points cannot determine a conic")));
    }
    let design = DMatrix::from_fn(n, 6, |i, col| {
        let v = curve.vertex(i);
        match col {
            0 => v.x * v.x,
            1 => SQRT_2 * v.x * v.y,
            2 => v.y * v.y,
            3 => v.x,
            4 => v.y,
            _ => 1.0,
        }
    });
    let svd = design.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let smallest = order[0];
    let largest = svd.singular_values[order[order.len() - 1]];
    let degenerate = svd.singular_values[order[1]] <= 1e-12 * largest.max(1e-300);

    let row = v_t.row(smallest);
    let norm = row.norm();
    let mut coefficients = [0.0; 6];
    for (c, x) in coefficients.iter_mut().zip(row.iter()) {
        *c = x / norm;
    }
    let values = &design * nalgebra::DVector::from_column_slice(&coefficients);
    let residual = (values.norm_squared() / n as f64).sqrt();
    coefficients[1] *= SQRT_2;

    let [a, b, c, ..] = coefficients;
    let elliptic = !degenerate && b * b - 4.0 * a * c < 0.0;
    let eccentricity = elliptic.then(|| {
        let eig = Matrix2::new(a, 0.5 * b, 0.5 * b, c).symmetric_eigenvalues();
        let (x, y) = (eig[0].abs(), eig[1].abs());
        (1.0 - x.min(y) / x.max(y)).max(0.0).sqrt()
    });
    Ok(ConicFit {
        coefficients,
        residual,
        elliptic,
        eccentricity,
        degenerate,
    })
}

fn point_segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * t)).norm()
}

fn directed(from: &PolyCurve, to: &PolyCurve) -> f64 {
    let m = to.n();
    crate::reduce::rows(from.n(), |i| {
        let p = from.vertex(i);
        (0..m)
            .map(|j| point_segment_distance(&p, &to.vertex(j), &to.vertex(j + 1)))
            .fold(f64::INFINITY, f64::min)
    })
    .into_iter()
    .fold(0.0, f64::max)
}

/// Symmetric vertex-to-polyline Hausdorff distance. Meaningful for curves
/// brought to a common frame first, see [`crate::optimizer::canonicalize`].
pub fn hausdorff(a: &PolyCurve, b: &PolyCurve) -> f64 {
    directed(a, b).max(directed(b, a))
}

/// One row of an exponent sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub p: f64,
    /// `A_p` of the computed maximizer.
    pub value: f64,
    /// Widest over narrowest projection.
    pub r: f64,
    /// `log10` of the conic fit residual.
    pub efit_log10: f64,
    /// `NaN` when the best conic is not an ellipse.
    pub eccentricity: f64,
    pub converged: bool,
}

impl SweepRecord {
    /// Row for a grid point whose optimization failed outright.
    pub fn failed(p: f64) -> Self {
        Self {
            p,
            value: f64::NAN,
            r: f64::NAN,
            efit_log10: f64::NAN,
            eccentricity: f64::NAN,
            converged: false,
        }
    }

    /// Diagnostics of `curve` as a maximizer at exponent `p`.
    pub fn measure(p: f64, value: f64, curve: &PolyCurve, converged: bool) -> Result<Self> {
        let fit = fit_conic(curve)?;
        Ok(Self {
            p,
            value,
            r: width_ratio(curve, 360)?,
            efit_log10: fit.residual_log10(),
            eccentricity: fit.eccentricity.unwrap_or(f64::NAN),
            converged,
        })
    }
}
