//! Shared inputs for the benchmarks.

use knotchord::geometry::{make_circle, random_closed_curve};
use knotchord::PolyCurve;

/// A planar and a space curve with a few harmonics, plus the regular polygon.
pub fn fixtures(n: usize) -> Vec<(&'static str, PolyCurve)> {
    vec![
        ("circle", make_circle(n).expect("valid n")),
        ("planar", random_closed_curve(17, 4, 0.6, n, 2).expect("valid n")),
        ("space", random_closed_curve(18, 4, 0.6, n, 3).expect("valid n")),
    ]
}
