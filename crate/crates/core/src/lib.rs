//! Discrete closed unit-speed curves, knot energies and chord-power functionals.
//!
//! Curves are equilateral polygons of perimeter 2π sampled on the uniform
//! parameter grid `t_i = 2πi/N`, so every double integral over the curve is a
//! uniform Riemann sum with weight `2π/N` and a shift by arclength `s = 2πk/N`
//! is an index shift by `k`.
//!
//! The crate is organised as
//!
//! - [`geometry`]: curve construction, arclength resampling and metric queries,
//! - [`functionals`]: renormalization energies, the O'Hara family `E_j^p`,
//!   its circle bound, average chord powers `A_p` and distortion,
//! - [`spectral`]: Fourier coefficients and the Wirtinger-type chord deficit,
//! - [`optimizer`]: projected gradient ascent of `A_p` over planar curves,
//! - [`shape`]: width ratios, conic fits and Hausdorff distances,
//! - [`harness`]: verification reports, sweeps, figures and file formats.

pub mod error;
pub mod functionals;
pub mod geometry;
pub mod harness;
pub mod optimizer;
pub mod quadrature;
mod reduce;
pub mod shape;
pub mod spectral;

pub use error::{Error, Result};
pub use functionals::{ChordKernel, EnergyParams};
pub use geometry::{ArcSeparation, Point, PolyCurve};
pub use harness::{ExperimentConfig, VerificationReport};
pub use optimizer::{OptimizeOptions, OptimizeResult};
pub use shape::{ConicFit, SweepRecord};
pub use spectral::{DeficitProfile, FourierCurve};
