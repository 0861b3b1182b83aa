//! Transfer matrices of piecewise-constant canonical systems, gauge changes of
//! solved families and recovery of the Arov parameters.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::coefficients::{
    arov_generator, ArovParameters, CanonicalSystem, CheckedGeneral, Gauge, Grid, TailPolicy, COEFF_TOL,
};
use crate::error::{Error, Result};
use crate::mat2::{su11_normalizer, Mat2, ScaledMat2};

/// Below this `|x|` the exponential uses its Taylor expansion.
const TAYLOR_BRANCH: f64 = 1e-6;
/// Above this `Re x` the scaled exponential factors out `e^{Re x}`.
const SCALE_BRANCH: f64 = 20.0;
/// Relative tolerance on the Arov normalization when reading a family back.
pub const GAUGE_TOL: f64 = 1e-9;
/// Slack on `|a| <= 1` for recovered coefficients before declaring the family inconsistent.
pub const RECOVERY_TOL: f64 = 1e-8;
/// Intervals whose `μ` increment is below this carry no mass.
pub const ZERO_MASS: f64 = 1e-12;

/// `exp(G t) = e^L (c I + s G t)` for trace-free `G`.
fn exp_parts(g: &Mat2, t: f64) -> (f64, Complex64, Complex64) {
    let x2 = -g.det() * (t * t);
    if x2.norm() < TAYLOR_BRANCH * TAYLOR_BRANCH {
        let c = 1.0 + x2 * (0.5 + x2 * (1.0 / 24.0 + x2 / 720.0));
        let s = 1.0 + x2 * (1.0 / 6.0 + x2 * (1.0 / 120.0 + x2 / 5040.0));
        return (0.0, c, s);
    }
    let x = x2.sqrt();
    if x.re <= SCALE_BRANCH {
        return (0.0, x.cosh(), x.sinh() / x);
    }
    let up = Complex64::from_polar(1.0, x.im);
    let down = Complex64::from_polar((-2.0 * x.re).exp(), -x.im);
    (x.re, (up + down) * 0.5, (up - down) / (x * 2.0))
}

/// `exp(G t)` for a trace-free generator `G`, in closed form.
pub fn expm_trace_free(g: &Mat2, t: f64) -> Mat2 {
    let (l, c, s) = exp_parts(g, t);
    let m = Mat2::identity() * c + *g * (s * t);
    if l == 0.0 {
        m
    } else {
        m * l.exp()
    }
}

/// `exp(G t)` with the growth factored out.
pub fn expm_trace_free_scaled(g: &Mat2, t: f64) -> ScaledMat2 {
    let (l, c, s) = exp_parts(g, t);
    ScaledMat2::new(l, Mat2::identity() * c + *g * (s * t))
}

fn check_step(z: Complex64, a: Complex64, dmu: f64) -> Result<()> {
    if !z.is_finite() || !a.is_finite() || !dmu.is_finite() {
        return Err(Error::NonFinite("propagator input"));
    }
    if a.norm() > 1.0 + COEFF_TOL {
        return Err(Error::CoefficientRange(a.norm()));
    }
    if dmu < 0.0 {
        return Err(Error::Precondition(format!("negative measure increment {dmu}")));
    }
    Ok(())
}

/// Transfer matrix of constant coefficient `a` over a `μ`-increment `dmu`.
pub fn propagate_constant(z: Complex64, a: Complex64, dmu: f64) -> Result<Mat2> {
    check_step(z, a, dmu)?;
    let m = expm_trace_free(&arov_generator(z, a), dmu);
    if m.is_finite() {
        Ok(m)
    } else {
        Err(Error::Overflow)
    }
}

pub fn propagate_constant_scaled(z: Complex64, a: Complex64, dmu: f64) -> Result<ScaledMat2> {
    check_step(z, a, dmu)?;
    Ok(expm_trace_free_scaled(&arov_generator(z, a), dmu))
}

/// Transfer matrix over `[from, to]`: the ordered product of the per-piece exponentials.
pub fn transfer_between<S: CanonicalSystem + ?Sized>(z: Complex64, sys: &S, from: f64, to: f64) -> Result<Mat2> {
    if !z.is_finite() {
        return Err(Error::NonFinite("spectral parameter"));
    }
    let mut m = Mat2::identity();
    for piece in sys.grid().pieces(from, to)? {
        let dm = sys.density(piece.index) * piece.width;
        if dm > 0.0 {
            m = m * expm_trace_free(&sys.generator(piece.index, z), dm);
        }
    }
    if m.is_finite() {
        Ok(m)
    } else {
        Err(Error::Overflow)
    }
}

pub fn transfer_between_scaled<S: CanonicalSystem + ?Sized>(
    z: Complex64,
    sys: &S,
    from: f64,
    to: f64,
) -> Result<ScaledMat2> {
    if !z.is_finite() {
        return Err(Error::NonFinite("spectral parameter"));
    }
    let mut m = ScaledMat2::identity();
    for piece in sys.grid().pieces(from, to)? {
        let dm = sys.density(piece.index) * piece.width;
        if dm > 0.0 {
            m = m * expm_trace_free_scaled(&sys.generator(piece.index, z), dm);
        }
    }
    Ok(m)
}

/// `A(z, ℓ)`, the solution at length `ℓ` started from `I` at 0.
pub fn transfer<S: CanonicalSystem + ?Sized>(z: Complex64, sys: &S, ell: f64) -> Result<Mat2> {
    transfer_between(z, sys, 0.0, ell)
}

pub fn transfer_scaled<S: CanonicalSystem + ?Sized>(z: Complex64, sys: &S, ell: f64) -> Result<ScaledMat2> {
    transfer_between_scaled(z, sys, 0.0, ell)
}

/// Transfer matrix of validated general-gauge coefficients.
pub fn transfer_general(z: Complex64, c: &CheckedGeneral, t: f64) -> Result<Mat2> {
    transfer(z, c, t)
}

/// Solutions `A(z_j, ℓ_k)` on a grid of spectral points and lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferFamily {
    pub zs: Vec<Complex64>,
    pub knots: Vec<f64>,
    /// `values[j][k] = A(zs[j], knots[k])`.
    pub values: Vec<Vec<Mat2>>,
    pub gauge: Gauge,
}

impl TransferFamily {
    /// Solves `sys` at every `z` (in parallel) and records the prefix products at `knots`.
    pub fn compute<S: CanonicalSystem + ?Sized>(sys: &S, zs: &[Complex64], knots: &[f64]) -> Result<Self> {
        if knots.first() != Some(&0.0) {
            return Err(Error::Precondition("family knots must start at 0".into()));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition("family knots must increase strictly".into()));
        }
        let values = zs
            .par_iter()
            .map(|&z| {
                let mut row = Vec::with_capacity(knots.len());
                let mut m = Mat2::identity();
                row.push(m);
                for w in knots.windows(2) {
                    m = m * transfer_between(z, sys, w[0], w[1])?;
                    row.push(m);
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { zs: zs.to_vec(), knots: knots.to_vec(), values, gauge: sys.gauge() })
    }

    pub fn z_index(&self, z: Complex64) -> Option<usize> {
        self.zs.iter().position(|&w| (w - z).norm() <= 1e-14)
    }

    /// Right-multiplies every value at knot `k` by `factors[k]`.
    pub fn right_multiply(&self, factors: &[Mat2], gauge: Gauge) -> Self {
        let values = self
            .values
            .iter()
            .map(|row| row.iter().zip(factors).map(|(m, u)| *m * *u).collect())
            .collect();
        Self { zs: self.zs.clone(), knots: self.knots.clone(), values, gauge }
    }

    /// Largest `|det A − 1|` over the family.
    pub fn max_det_error(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .map(|m| (m.det() - 1.0).norm())
            .fold(0.0, f64::max)
    }
}

/// Normalizes a family so that `A(i, ℓ_k)` is lower triangular with positive
/// diagonal; returns the family and the gauge factors `U(ℓ_k)`.
pub fn to_arov_gauge(f: &TransferFamily) -> Result<(TransferFamily, Vec<Mat2>)> {
    let i = Complex64::i();
    let j = f.z_index(i).ok_or(Error::MissingSpectralPoint(i))?;
    let us = f.values[j].iter().map(su11_normalizer).collect::<Result<Vec<_>>>()?;
    Ok((f.right_multiply(&us, Gauge::Arov), us))
}

/// Normalizes a family so that `A(0, ℓ_k) = I`.
pub fn to_pdb_gauge(f: &TransferFamily) -> Result<TransferFamily> {
    let zero = Complex64::new(0.0, 0.0);
    let j = f.z_index(zero).ok_or(Error::MissingSpectralPoint(zero))?;
    let vs = f.values[j]
        .iter()
        .map(|m| m.inverse().ok_or_else(|| Error::Inconsistent("A(0, ℓ) is singular".into())))
        .collect::<Result<Vec<_>>>()?;
    let mut out = f.right_multiply(&vs, Gauge::PdB);
    for m in &mut out.values[j] {
        *m = Mat2::identity();
    }
    Ok(out)
}

/// Arov parameters read back from a solved family, with the samples of
/// `μ(ℓ_k)` and `κ(ℓ_k)` they come from.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveredParameters {
    pub params: ArovParameters,
    pub mu: Vec<f64>,
    pub kappa: Vec<Complex64>,
    /// Intervals without `μ`-mass, where `a` is set to 0.
    pub zero_mass: Vec<bool>,
}

/// `μ = log A11(i)`, `κ = −A21(i)/A11(i)` and per interval
/// `a_k = Δκ / (e^{−2μ_k} − e^{−2μ_{k+1}})`, `m_k = Δμ/Δℓ`.
pub fn recover_parameters(f: &TransferFamily) -> Result<RecoveredParameters> {
    if f.gauge != Gauge::Arov {
        return Err(Error::GaugeViolation(format!("family is tagged {:?}", f.gauge)));
    }
    let i = Complex64::i();
    let j = f.z_index(i).ok_or(Error::MissingSpectralPoint(i))?;
    let mut mu = Vec::with_capacity(f.knots.len());
    let mut kappa = Vec::with_capacity(f.knots.len());
    for (k, m) in f.values[j].iter().enumerate() {
        let scale = m.max_abs();
        if !(m.a11.re > 0.0) || m.a11.im.abs() > GAUGE_TOL * scale || m.a12.norm() > GAUGE_TOL * scale {
            return Err(Error::GaugeViolation(format!(
                "A(i, {}) is not lower triangular with positive diagonal",
                f.knots[k]
            )));
        }
        mu.push(m.a11.re.ln());
        kappa.push(-m.a21 / m.a11.re);
    }
    let n = f.knots.len() - 1;
    if n == 0 {
        return Err(Error::Precondition("family needs at least two knots".into()));
    }
    let mut density = Vec::with_capacity(n);
    let mut coeff = Vec::with_capacity(n);
    let mut zero_mass = Vec::with_capacity(n);
    for k in 0..n {
        let dmu = mu[k + 1] - mu[k];
        let dl = f.knots[k + 1] - f.knots[k];
        if dmu < -ZERO_MASS {
            return Err(Error::Inconsistent(format!("μ decreases on interval {k}")));
        }
        if dmu <= ZERO_MASS {
            density.push(0.0);
            coeff.push(Complex64::new(0.0, 0.0));
            zero_mass.push(true);
            continue;
        }
        let denom = (-2.0 * mu[k]).exp() - (-2.0 * mu[k + 1]).exp();
        let mut a = (kappa[k + 1] - kappa[k]) / denom;
        let r = a.norm();
        if r > 1.0 + RECOVERY_TOL {
            return Err(Error::Inconsistent(format!("recovered |a| = {r} on interval {k}")));
        }
        if r > 1.0 {
            a /= r;
        }
        density.push(dmu / dl);
        coeff.push(a);
        zero_mass.push(false);
    }
    let grid = Grid::new(f.knots.clone(), TailPolicy::Finite)?;
    let params = ArovParameters::new(grid, density, coeff)?;
    Ok(RecoveredParameters { params, mu, kappa, zero_mass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{validate_general, GeneralCoefficients};
    use crate::mat2::{j_defect, JClass};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const E: f64 = std::f64::consts::E;

    #[test]
    fn free_propagator_at_i() {
        let m = propagate_constant(Complex64::i(), c(0.0, 0.0), 1.0).unwrap();
        assert!(m.dist(&Mat2::real(E, 0.0, 0.0, 1.0 / E)) < 1e-15);
    }

    #[test]
    fn half_coefficient_at_i() {
        let m = propagate_constant(Complex64::i(), c(0.5, 0.0), 1.0).unwrap();
        let expected = Mat2::real(E, 0.0, -1f64.sinh(), 1.0 / E);
        assert!(m.dist(&expected) < 1e-15);
        assert_eq!(m.a12, c(0.0, 0.0));
        let kappa = -m.a21 / m.a11;
        assert!((kappa - 0.5 * (1.0 - (-2f64).exp())).norm() < 1e-15);
    }

    #[test]
    fn determinant_is_one() {
        for (z, a, d) in [(c(0.3, 0.7), c(0.2, -0.5), 1.3), (c(-2.0, 0.1), c(0.99, 0.0), 4.0), (c(5.0, 5.0), c(0.0, 1.0), 0.2)] {
            let m = propagate_constant(z, a, d).unwrap();
            assert!((m.det() - 1.0).norm() < 1e-12, "{m:?}");
        }
    }

    #[test]
    fn taylor_branch_matches_first_order() {
        let g = arov_generator(c(0.1, 0.2), c(0.3, 0.0));
        let t = 1e-9;
        let m = expm_trace_free(&g, t);
        let approx = Mat2::identity() + g * t;
        assert!(m.dist(&approx) < 1e-17);
        let m = propagate_constant(c(0.0, 0.0), c(1.0, 0.0), 0.0).unwrap();
        assert_eq!(m, Mat2::identity());
    }

    #[test]
    fn scaled_exponential_agrees() {
        let g = arov_generator(c(0.4, 30.0), c(0.3, 0.2));
        let plain = expm_trace_free(&g, 1.0);
        let scaled = expm_trace_free_scaled(&g, 1.0).to_mat().unwrap();
        assert!(plain.dist(&scaled) < 1e-12 * plain.max_abs());
        let huge = propagate_constant_scaled(c(0.0, 1000.0), c(0.1, 0.0), 2.0).unwrap();
        assert!(huge.to_mat().is_none());
        assert!(propagate_constant(c(0.0, 1000.0), c(0.1, 0.0), 2.0).is_err());
        assert!(huge.log_norm().is_finite());
    }

    #[test]
    fn range_errors() {
        assert!(matches!(propagate_constant(Complex64::i(), c(1.5, 0.0), 1.0), Err(Error::CoefficientRange(_))));
        assert!(matches!(propagate_constant(Complex64::i(), c(0.5, 0.0), -1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn transfer_examples() {
        let p = ArovParameters::constant(c(0.5, 0.0), 1.0).unwrap();
        let z = c(0.3, 0.8);
        assert_eq!(transfer(z, &p, 0.0).unwrap(), Mat2::identity());
        assert!(transfer(z, &p, 1.0).unwrap().dist(&propagate_constant(z, c(0.5, 0.0), 1.0).unwrap()) < 1e-15);
    }

    #[test]
    fn dirac_and_pdb() {
        let grid = Grid::from_breaks(&[0.5, 1.5], TailPolicy::ConstantExtend).unwrap();
        let dirac = validate_general(GeneralCoefficients::dirac(grid.clone())).unwrap();
        let t = 2.3;
        let m = transfer_general(Complex64::i(), &dirac, t).unwrap();
        assert!(m.dist(&Mat2::real(t.exp(), 0.0, 0.0, (-t).exp())) < 1e-13);
        assert!(transfer_general(c(0.0, 0.0), &dirac, t).unwrap().dist(&Mat2::identity()) < 1e-15);
        let schr = validate_general(GeneralCoefficients::schrodinger(grid, &[0.7, -1.0])).unwrap();
        let m = transfer_general(c(1.7, 0.0), &schr, t).unwrap();
        assert_eq!(j_defect(&m).unwrap().class, JClass::Unitary);
    }

    #[test]
    fn arov_family_recovers_constant() {
        let p = ArovParameters::constant(c(0.5, 0.0), 1.0).unwrap();
        let knots: Vec<f64> = (0..=8).map(|k| k as f64 * 0.25).collect();
        let f = TransferFamily::compute(&p, &[Complex64::i(), c(0.5, 0.5)], &knots).unwrap();
        let (g, us) = to_arov_gauge(&f).unwrap();
        assert!(us.iter().all(|u| u.dist(&Mat2::identity()) < 1e-15));
        assert_eq!(g.gauge, Gauge::Arov);
        let r = recover_parameters(&f).unwrap();
        for (k, &l) in knots.iter().enumerate() {
            assert!((r.mu[k] - l).abs() < 1e-14);
        }
        assert!(r.params.coefficients().iter().all(|a| (a - 0.5).norm() < 1e-12));
        assert!(r.params.densities().iter().all(|m| (m - 1.0).abs() < 1e-12));
    }

    #[test]
    fn zero_mass_interval_is_flagged() {
        let grid = Grid::new(vec![0.0, 1.0, 2.0, 3.0], TailPolicy::Finite).unwrap();
        let p = ArovParameters::new(grid, vec![1.0, 0.0, 2.0], vec![c(0.2, 0.1), c(0.9, 0.0), c(-0.4, 0.0)]).unwrap();
        let f = TransferFamily::compute(&p, &[Complex64::i()], &[0.0, 1.0, 2.0, 3.0]).unwrap();
        let r = recover_parameters(&f).unwrap();
        assert_eq!(r.zero_mass, vec![false, true, false]);
        assert_eq!(r.params.coefficients()[1], c(0.0, 0.0));
        assert!((r.params.coefficients()[2] - c(-0.4, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn gauge_preconditions() {
        let p = ArovParameters::constant(c(0.5, 0.0), 1.0).unwrap();
        let f = TransferFamily::compute(&p, &[c(1.0, 1.0)], &[0.0, 1.0]).unwrap();
        assert!(matches!(to_arov_gauge(&f), Err(Error::MissingSpectralPoint(_))));
        assert!(matches!(to_pdb_gauge(&f), Err(Error::MissingSpectralPoint(_))));
        let raw = f.right_multiply(&[Mat2::identity(); 2], Gauge::Raw);
        assert!(matches!(recover_parameters(&raw), Err(Error::GaugeViolation(_))));
    }

    #[test]
    fn pdb_round_trip() {
        let p = ArovParameters::constant(c(0.3, -0.2), 1.5).unwrap();
        let zs = [c(0.0, 0.0), Complex64::i(), c(0.7, 0.4)];
        let knots = [0.0, 0.5, 1.0, 2.0];
        let f = TransferFamily::compute(&p, &zs, &knots).unwrap();
        let pdb = to_pdb_gauge(&f).unwrap();
        assert!(pdb.values[0].iter().all(|m| *m == Mat2::identity()));
        let back = to_pdb_gauge(&to_arov_gauge(&pdb).unwrap().0).unwrap();
        for (r1, r2) in back.values.iter().zip(&pdb.values) {
            for (a, b) in r1.iter().zip(r2) {
                assert!(a.dist(b) < 1e-10);
            }
        }
        let arov = to_arov_gauge(&pdb).unwrap().0;
        for (r1, r2) in arov.values.iter().zip(&f.values) {
            for (a, b) in r1.iter().zip(r2) {
                assert!(a.dist(b) < 1e-10);
            }
        }
    }
}
