//! Exponential type, reflectionless diagnostics and the harmonic-measure
//! defect of stripped Schur functions.

pub mod harmonic;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::coefficients::{ArovParameters, CanonicalSystem, FullLine};
use crate::error::{Error, Result};
use crate::extrapolate::neville_at_zero;
use crate::mat2::{mobius_right, Mat2, ProjPoint, ScaledMat2};
use crate::propagate::transfer_scaled;
use crate::weyl::{schur_minus_with, schur_plus_with, SchurOptions};

pub use harmonic::{gamma_metric, harmonic_measure, Arc};

/// Heights `y` at which `log‖A(iy, ℓ)‖ / y` is sampled.
pub const TYPE_HEIGHTS: [f64; 5] = [50.0, 100.0, 200.0, 400.0, 800.0];
/// Points with `max(|s₊|, |s₋|) < 1 − AC_DELTA` count as absolutely continuous spectrum.
pub const AC_DELTA: f64 = 0.02;

/// `∫₀^ℓ √(1 − |a|²) dμ` in Arov gauge, `∫₀^t √(det P) dν` in general.
pub fn exponential_type_integral<S: CanonicalSystem + ?Sized>(sys: &S, ell: f64) -> Result<f64> {
    Ok(sys.grid().pieces(0.0, ell)?.map(|p| sys.type_density(p.index) * p.width).sum())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TypeNumeric {
    pub estimate: f64,
    pub heights: Vec<f64>,
    /// `log‖A(iy, ℓ)‖ / y` at each height.
    pub samples: Vec<f64>,
}

/// Growth rate `lim log‖A(iy)‖ / y` from the samples at [`TYPE_HEIGHTS`].
///
/// The extrapolation variable is `y^{−1/2}`: the polynomial in it also
/// captures the `1/y` corrections, and it absorbs the `y^{−1/2}` decay of
/// systems of exponential order one half, which have type 0.
pub fn exponential_type_numeric(eval: impl Fn(f64) -> Result<ScaledMat2> + Sync) -> Result<TypeNumeric> {
    let samples = TYPE_HEIGHTS
        .par_iter()
        .map(|&y| Ok(eval(y)?.log_norm() / y))
        .collect::<Result<Vec<f64>>>()?;
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("exponential type sample"));
    }
    let h: Vec<f64> = TYPE_HEIGHTS.iter().map(|y| y.sqrt().recip()).collect();
    let values: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    let estimate = neville_at_zero(&h, &values).re;
    Ok(TypeNumeric { estimate, heights: TYPE_HEIGHTS.to_vec(), samples })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TypeReport {
    pub sigma_integral: f64,
    pub sigma_numeric: f64,
    pub y_samples: Vec<f64>,
    pub samples: Vec<f64>,
    /// `|σ_numeric − σ_integral| / max(σ_integral, 10⁻⁶)`.
    pub relative_gap: f64,
}

/// Both sides of the exponential-type identity for the system truncated at `ℓ`.
pub fn exponential_type<S: CanonicalSystem + ?Sized>(sys: &S, ell: f64) -> Result<TypeReport> {
    let sigma_integral = exponential_type_integral(sys, ell)?;
    let numeric = exponential_type_numeric(|y| transfer_scaled(Complex64::new(0.0, y), sys, ell))?;
    let relative_gap = (numeric.estimate - sigma_integral).abs() / sigma_integral.max(1e-6);
    Ok(TypeReport {
        sigma_integral,
        sigma_numeric: numeric.estimate,
        y_samples: numeric.heights,
        samples: numeric.samples,
        relative_gap,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReflectionlessPoint {
    pub x: f64,
    pub eps: f64,
    pub s_plus: Option<Complex64>,
    pub s_minus: Option<Complex64>,
    /// `|s₊ − conj(s₋)|`.
    pub defect: Option<f64>,
    /// `max(|s₊|, |s₋|) < 1 − AC_DELTA`.
    pub ac: bool,
    /// Why the point could not be evaluated.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReflectionlessReport {
    pub xs: Vec<f64>,
    pub eps: Vec<f64>,
    /// Ordered by `eps`, then by `x`.
    pub points: Vec<ReflectionlessPoint>,
}

impl ReflectionlessReport {
    pub fn at_eps(&self, eps: f64) -> impl Iterator<Item = &ReflectionlessPoint> {
        self.points.iter().filter(move |p| p.eps == eps)
    }

    /// Largest defect over the evaluated a.c. points at `eps`.
    pub fn max_ac_defect(&self, eps: f64) -> Option<f64> {
        self.at_eps(eps).filter(|p| p.ac).filter_map(|p| p.defect).reduce(f64::max)
    }
}

/// Evaluates `s₊(x + iε)` and `s₋(x + iε)` on a grid and the defect of the
/// reflectionless relation `s₊ = conj(s₋)`, once per `ε` of the ladder.
pub fn reflectionless_defect(
    left: &ArovParameters,
    right: &ArovParameters,
    xs: &[f64],
    eps_ladder: &[f64],
    opts: &SchurOptions,
) -> Result<ReflectionlessReport> {
    if eps_ladder.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Precondition("every ε must be positive".into()));
    }
    let jobs: Vec<(f64, f64)> = eps_ladder.iter().flat_map(|&e| xs.iter().map(move |&x| (e, x))).collect();
    let points = jobs
        .par_iter()
        .map(|&(eps, x)| {
            let z = Complex64::new(x, eps);
            let sp = schur_plus_with(z, right, opts);
            let sm = schur_minus_with(z, left, opts);
            match (sp, sm) {
                (Ok(p), Ok(m)) => {
                    let (p, m) = (p.value, m.value);
                    ReflectionlessPoint {
                        x,
                        eps,
                        s_plus: Some(p),
                        s_minus: Some(m),
                        defect: Some((p - m.conj()).norm()),
                        ac: p.norm().max(m.norm()) < 1.0 - AC_DELTA,
                        error: None,
                    }
                }
                (p, m) => ReflectionlessPoint {
                    x,
                    eps,
                    s_plus: p.as_ref().ok().map(|v| v.value),
                    s_minus: m.as_ref().ok().map(|v| v.value),
                    defect: None,
                    ac: false,
                    error: p.err().or(m.err()).map(|e| e.to_string()),
                },
            }
        })
        .collect();
    Ok(ReflectionlessReport { xs: xs.to_vec(), eps: eps_ladder.to_vec(), points })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BpReport {
    pub ells: Vec<f64>,
    /// `∫_e ω_{s₋(x,ℓ)}(conj S) − ω_{s₊(x,ℓ)}(S) dx` per `ℓ`.
    pub defects: Vec<f64>,
    /// Quadrature nodes skipped at each `ℓ` because `|s±| >= 1` or evaluation failed.
    pub excluded: Vec<usize>,
    pub nodes: usize,
    /// Whether `|s±(i, ℓ)| < 1` holds at each sampled `ℓ`.
    pub hypothesis: Vec<bool>,
}

fn strip_through(s: Complex64, m: &Mat2) -> Option<Complex64> {
    match mobius_right(ProjPoint::Finite(s), m) {
        Ok(ProjPoint::Finite(w)) if w.is_finite() => Some(w),
        _ => None,
    }
}

/// `(s₊(z, ℓ), s₋(z, ℓ))` from `s±(z)` and `A(z, ℓ)` of the right half-line.
fn stripped_pair(sp: Complex64, sm: Complex64, a: &Mat2) -> (Option<Complex64>, Option<Complex64>) {
    let j1 = Mat2::j1();
    (strip_through(sp, a), strip_through(sm, &(j1 * *a * j1)))
}

fn trapezoid_nodes(e: &[(f64, f64)], x_step: f64) -> Result<Vec<(f64, f64)>> {
    if !(x_step > 0.0) {
        return Err(Error::Precondition("x step must be positive".into()));
    }
    let mut nodes = Vec::new();
    for &(a, b) in e {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::Precondition(format!("invalid interval [{a}, {b}]")));
        }
        let n = ((b - a) / x_step).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        for i in 0..=n {
            let w = if i == 0 || i == n { h / 2.0 } else { h };
            nodes.push((a + i as f64 * h, w));
        }
    }
    Ok(nodes)
}

/// Trapezoid approximation of the harmonic-measure defect of the stripped
/// Schur functions over `e`, at each length of `ells`.
pub fn bp_defect(
    full: &FullLine,
    e: &[(f64, f64)],
    arc: &Arc,
    ells: &[f64],
    x_step: f64,
    eps: f64,
    opts: &SchurOptions,
) -> Result<BpReport> {
    if !(eps > 0.0) {
        return Err(Error::Precondition("ε must be positive".into()));
    }
    let nodes = trapezoid_nodes(e, x_step)?;
    let conj_arc = arc.conj();
    let per_node: Vec<Vec<Option<f64>>> = nodes
        .par_iter()
        .map(|&(x, _)| {
            let z = Complex64::new(x, eps);
            let limits = schur_plus_with(z, &full.right, opts)
                .and_then(|p| Ok((p.value, schur_minus_with(z, &full.left, opts)?.value)));
            let Ok((sp, sm)) = limits else {
                return vec![None; ells.len()];
            };
            ells.iter()
                .map(|&l| {
                    let a = transfer_scaled(z, &full.right, l).ok()?.mat;
                    let (p, m) = stripped_pair(sp, sm, &a);
                    let (p, m) = (p?, m?);
                    let minus = harmonic_measure(m, &conj_arc).ok()?;
                    let plus = harmonic_measure(p, arc).ok()?;
                    Some(minus - plus)
                })
                .collect()
        })
        .collect();
    let mut defects = vec![0.0; ells.len()];
    let mut excluded = vec![0; ells.len()];
    for (values, &(_, w)) in per_node.iter().zip(&nodes) {
        for (k, v) in values.iter().enumerate() {
            match v {
                Some(v) => defects[k] += w * v,
                None => excluded[k] += 1,
            }
        }
    }
    let i = Complex64::i();
    let sp_i = schur_plus_with(i, &full.right, opts)?.value;
    let hypothesis = ells
        .iter()
        .map(|&l| {
            let a = transfer_scaled(i, &full.right, l)?.mat;
            let (p, m) = stripped_pair(sp_i, Complex64::new(0.0, 0.0), &a);
            Ok(matches!((p, m), (Some(p), Some(m)) if p.norm() < 1.0 && m.norm() < 1.0))
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(BpReport { ells: ells.to_vec(), defects, excluded, nodes: nodes.len(), hypothesis })
}
