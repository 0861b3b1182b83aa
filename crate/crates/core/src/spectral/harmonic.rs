//! Harmonic measure of circular arcs and the pseudo-distance `γ` on the unit disk.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// The arc `{e^{iθ} : start <= θ <= end}`, traversed counterclockwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    pub start: f64,
    pub end: f64,
}

impl Arc {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::NonFinite("arc angles"));
        }
        if end < start {
            return Err(Error::Precondition(format!("arc end {end} precedes start {start}")));
        }
        Ok(Self { start, end })
    }

    pub fn full() -> Self {
        Self { start: 0.0, end: TAU }
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    /// The complex-conjugate arc `[−end, −start]`.
    pub fn conj(&self) -> Self {
        Self { start: -self.end, end: -self.start }
    }
}

fn check_inside(w: Complex64) -> Result<()> {
    if !w.is_finite() {
        return Err(Error::NonFinite("disk point"));
    }
    if w.norm() >= 1.0 {
        return Err(Error::OutsideDisk(w));
    }
    Ok(())
}

/// `ω_w(S)`, the Poisson-kernel mass of the arc `S` seen from `w`.
///
/// With `α ∈ [0, 2π)` the angle at `w` from the start point to the end point
/// of the arc, `ω = α/π − |S|/(2π)`.
pub fn harmonic_measure(w: Complex64, arc: &Arc) -> Result<f64> {
    check_inside(w)?;
    let len = arc.length();
    if len >= TAU {
        return Ok(1.0);
    }
    if len == 0.0 {
        return Ok(0.0);
    }
    let p1 = Complex64::from_polar(1.0, arc.start) - w;
    let p2 = Complex64::from_polar(1.0, arc.end) - w;
    let mut alpha = (p2 / p1).arg();
    if alpha < 0.0 {
        alpha += TAU;
    }
    Ok((alpha / PI - len / TAU).clamp(0.0, 1.0))
}

/// `γ(w, z) = 2|w − z| / (√(1 − |w|²) √(1 − |z|²))`.
pub fn gamma_metric(w: Complex64, z: Complex64) -> Result<f64> {
    check_inside(w)?;
    check_inside(z)?;
    Ok(2.0 * (w - z).norm() / ((1.0 - w.norm_sqr()).sqrt() * (1.0 - z.norm_sqr()).sqrt()))
}
