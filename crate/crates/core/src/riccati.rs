//! The Riccati flow of stripped Schur functions, its fixed points and the
//! boundary behaviour at `+i∞`.

use num_complex::Complex64;

use crate::coefficients::{ArovParameters, COEFF_TOL};
use crate::error::{Error, Result};
use crate::extrapolate::neville_at_zero;
use crate::mat2::Mat2;

/// `|s|` beyond `1 + ESCAPE_TOL` certifies that the trajectory left the disk.
pub const ESCAPE_TOL: f64 = 1e-6;
/// Default `μ`-step.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Steps whose increment exceeds this are halved.
const MAX_INCREMENT: f64 = 0.05;
const MIN_STEP: f64 = 1e-14;

/// `∂_μ s = ā(iz+1)s² − 2iz·s + a(iz−1)`.
pub fn riccati_rhs(s: Complex64, z: Complex64, a: Complex64) -> Complex64 {
    let iz = Complex64::i() * z;
    a.conj() * (iz + 1.0) * s * s - 2.0 * iz * s + a * (iz - 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RiccatiStatus {
    Valid,
    /// `|s|` crossed 1 at the given `μ` and `ℓ`; the initial value was not a
    /// stripped Schur function.
    Escaped { mu: f64, ell: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiccatiState {
    pub s: Complex64,
    pub ell: f64,
    pub mu: f64,
    pub z: Complex64,
    pub status: RiccatiStatus,
}

impl RiccatiState {
    pub fn escaped(&self) -> bool {
        matches!(self.status, RiccatiStatus::Escaped { .. })
    }
}

fn rk4(s: Complex64, h: f64, z: Complex64, a: Complex64) -> Complex64 {
    let k1 = riccati_rhs(s, z, a);
    let k2 = riccati_rhs(s + k1 * (h / 2.0), z, a);
    let k3 = riccati_rhs(s + k2 * (h / 2.0), z, a);
    let k4 = riccati_rhs(s + k3 * h, z, a);
    s + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0)
}

/// Integrates the flow from `s0` at `ℓ = 0` to `ℓ` with classical RK4 in `μ`.
pub fn integrate_riccati(z: Complex64, s0: Complex64, p: &ArovParameters, ell: f64, step: f64) -> Result<RiccatiState> {
    let mut states = riccati_trajectory(z, s0, p, &[ell], step)?;
    Ok(states.pop().expect("one requested length"))
}

/// States at each of the increasing lengths `ells`; stops at the first escape.
pub fn riccati_trajectory(
    z: Complex64,
    s0: Complex64,
    p: &ArovParameters,
    ells: &[f64],
    step: f64,
) -> Result<Vec<RiccatiState>> {
    if !z.is_finite() || !s0.is_finite() {
        return Err(Error::NonFinite("Riccati input"));
    }
    if s0.norm() > 1.0 + ESCAPE_TOL {
        return Err(Error::Precondition(format!("|s0| = {} exceeds 1", s0.norm())));
    }
    if !(step > 0.0) {
        return Err(Error::Precondition("step must be positive".into()));
    }
    if ells.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition("lengths must be nondecreasing".into()));
    }
    let mut out = Vec::with_capacity(ells.len());
    let mut s = s0;
    let mut mu = 0.0;
    let mut at = 0.0;
    for &target in ells {
        for piece in p.grid().pieces(at, target)? {
            let m = p.densities()[piece.index];
            let a = p.coefficients()[piece.index];
            let span = m * piece.width;
            if span <= 0.0 {
                continue;
            }
            let h = span / (span / step).ceil();
            let mu_start = mu;
            let mut done = 0.0;
            let mut h_try = h;
            while done < span {
                let h_now = h_try.min(span - done);
                let next = rk4(s, h_now, z, a);
                if (next - s).norm() > MAX_INCREMENT {
                    h_try = h_now / 2.0;
                    if h_try < MIN_STEP {
                        return Err(Error::StepUnderflow(piece.start + done / m));
                    }
                    continue;
                }
                if next.norm() > 1.0 + ESCAPE_TOL {
                    let (r0, r1) = (s.norm(), next.norm());
                    let frac = if r0 < 1.0 { (1.0 - r0) / (r1 - r0) } else { 0.0 };
                    let mu_cross = mu_start + done + frac * h_now;
                    let ell_cross = piece.start + (mu_cross - mu_start) / m;
                    let stop = mu_start + done + h_now;
                    out.push(RiccatiState {
                        s: next,
                        ell: piece.start + (stop - mu_start) / m,
                        mu: stop,
                        z,
                        status: RiccatiStatus::Escaped { mu: mu_cross, ell: ell_cross },
                    });
                    return Ok(out);
                }
                s = next;
                done += h_now;
                h_try = (2.0 * h_now).min(h);
            }
            mu = mu_start + span;
        }
        at = target;
        out.push(RiccatiState { s, ell: target, mu, z, status: RiccatiStatus::Valid });
    }
    Ok(out)
}

/// The stationary point of the flow with constant `a` lying in the closed disk.
pub fn riccati_fixed_point(z: Complex64, a: Complex64) -> Result<Complex64> {
    if a.norm() > 1.0 + COEFF_TOL {
        return Err(Error::CoefficientRange(a.norm()));
    }
    let iz = Complex64::i() * z;
    let alpha = a.conj() * (iz + 1.0);
    let beta = -2.0 * iz;
    let gamma = a * (iz - 1.0);
    if alpha.norm() <= 1e-15 * (beta.norm() + gamma.norm()) {
        if beta == Complex64::new(0.0, 0.0) {
            return Err(Error::Precondition("z = 0 has no isolated fixed point".into()));
        }
        return Ok(-gamma / beta);
    }
    let root = (beta * beta - 4.0 * alpha * gamma).sqrt();
    let sign = if (beta.conj() * root).re >= 0.0 { 1.0 } else { -1.0 };
    let q = -(beta + root * sign) / 2.0;
    if q == Complex64::new(0.0, 0.0) {
        return Ok(q);
    }
    let roots = [q / alpha, gamma / q];
    let inside = roots.iter().filter(|r| r.norm() <= 1.0 + 1e-9);
    inside
        .min_by(|x, y| x.norm().total_cmp(&y.norm()))
        .copied()
        .ok_or_else(|| Error::Inconsistent(format!("no fixed point in the closed disk: {roots:?}")))
}

fn check_disk(w: Complex64) -> Result<f64> {
    if !w.is_finite() {
        return Err(Error::NonFinite("coefficient"));
    }
    let r = w.norm();
    if r > 1.0 + COEFF_TOL {
        return Err(Error::CoefficientRange(r));
    }
    Ok(r.min(1.0))
}

/// `c = a / (1 + √(1 − |a|²))`.
pub fn a_to_c(a: Complex64) -> Result<Complex64> {
    let r = check_disk(a)?;
    Ok(a / (1.0 + (1.0 - r * r).sqrt()))
}

/// `a = 2c / (1 + |c|²)`.
pub fn c_to_a(c: Complex64) -> Result<Complex64> {
    let r = check_disk(c)?;
    Ok(2.0 * c / (1.0 + r * r))
}

/// `V(a) = (1 − |a|²)^{−1/2} [[1, −ā], [−a, 1]]`, defined for `|a| < 1`.
pub fn v_matrix(a: Complex64) -> Result<Mat2> {
    let r = check_disk(a)?;
    if r >= 1.0 {
        return Err(Error::CoefficientRange(r));
    }
    let one = Complex64::new(1.0, 0.0);
    Ok(Mat2::new(one, -a.conj(), -a, one) * (1.0 - r * r).sqrt().recip())
}

/// Sample heights along the ray for [`boundary_limit`].
pub const BOUNDARY_HEIGHTS: [f64; 5] = [1e2, 316.227_766_016_837_94, 1e3, 3_162.277_660_168_379_5, 1e4];

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryLimit {
    pub estimate: Complex64,
    /// Difference between the five-point and the four-point extrapolants.
    pub spread: f64,
    pub heights: Vec<f64>,
    pub samples: Vec<Complex64>,
}

/// Limit of `s(z)` as `z → ∞` along `z = y e^{iδ}`, extrapolated in `1/y`.
pub fn boundary_limit(
    s: impl Fn(Complex64) -> Result<Complex64>,
    angle: f64,
    tol: f64,
) -> Result<BoundaryLimit> {
    if !(angle > 0.0 && angle < std::f64::consts::PI) {
        return Err(Error::Precondition(format!("ray angle {angle} does not point into the upper half-plane")));
    }
    let dir = Complex64::from_polar(1.0, angle);
    let samples = BOUNDARY_HEIGHTS.iter().map(|&y| s(dir * y)).collect::<Result<Vec<_>>>()?;
    let inv: Vec<f64> = BOUNDARY_HEIGHTS.iter().map(|y| y.recip()).collect();
    let estimate = neville_at_zero(&inv, &samples);
    let coarse = neville_at_zero(&inv[1..], &samples[1..]);
    let spread = (estimate - coarse).norm();
    if !(spread <= tol) {
        return Err(Error::NoLimit { estimate, spread, tol });
    }
    Ok(BoundaryLimit { estimate, spread, heights: BOUNDARY_HEIGHTS.to_vec(), samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rhs_examples() {
        let s = c(0.3, -0.2);
        assert!((riccati_rhs(s, Complex64::i(), c(0.0, 0.0)) - 2.0 * s).norm() < 1e-15);
        assert!(riccati_rhs(c(0.6, 0.0), Complex64::i(), c(0.6, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn fixed_points() {
        assert_eq!(riccati_fixed_point(c(0.4, 2.0), c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let a = c(0.3, 0.7);
        assert!((riccati_fixed_point(Complex64::i(), a).unwrap() - a).norm() < 1e-15);
        let s = riccati_fixed_point(c(0.0, 2.0), c(0.6, 0.0)).unwrap();
        assert!((s - (4.0 - 11.68f64.sqrt()) / 1.2).norm() < 1e-15);
        assert!((s.re - 0.485332).abs() < 1e-6);
    }

    #[test]
    fn fixed_point_residual() {
        for (z, a) in [(c(1.0, 1.0), c(0.9, 0.0)), (c(-3.0, 0.01), c(0.2, 0.5)), (c(100.0, 50.0), c(0.0, 0.99))] {
            let s = riccati_fixed_point(z, a).unwrap();
            assert!(s.norm() <= 1.0);
            assert!(riccati_rhs(s, z, a).norm() < 1e-10, "{z} {a}");
        }
    }

    #[test]
    fn free_flow_stays_and_escapes() {
        let p = ArovParameters::constant(c(0.0, 0.0), 1.0).unwrap();
        let r = integrate_riccati(Complex64::i(), c(0.0, 0.0), &p, 3.0, DEFAULT_STEP).unwrap();
        assert_eq!(r.s, c(0.0, 0.0));
        assert_eq!(r.status, RiccatiStatus::Valid);
        let r = integrate_riccati(Complex64::i(), c(0.5, 0.0), &p, 3.0, DEFAULT_STEP).unwrap();
        match r.status {
            RiccatiStatus::Escaped { mu, ell } => {
                let expected = 2f64.ln() / 2.0;
                assert!((mu - expected).abs() < 1e-6, "{mu}");
                assert!((ell - expected).abs() < 1e-6);
            }
            RiccatiStatus::Valid => panic!("should escape"),
        }
        let short = integrate_riccati(Complex64::i(), c(0.5, 0.0), &p, 0.2, DEFAULT_STEP).unwrap();
        assert!((short.s - 0.5 * 0.4f64.exp()).norm() < 1e-10);
    }

    #[test]
    fn a_c_bijection() {
        assert_eq!(a_to_c(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!((a_to_c(c(0.6, 0.0)).unwrap() - 1.0 / 3.0).norm() < 1e-15);
        assert!((c_to_a(c(1.0 / 3.0, 0.0)).unwrap() - 0.6).norm() < 1e-15);
        let u = c(0.6, 0.8);
        assert!((a_to_c(u).unwrap() - u).norm() < 1e-15);
        assert!(a_to_c(c(1.0, 1.0)).is_err());
    }

    #[test]
    fn v_square_root() {
        let a = c(0.5, -0.3);
        let cc = a_to_c(a).unwrap();
        let v = v_matrix(cc).unwrap();
        assert!((v * v).dist(&v_matrix(a).unwrap()) < 1e-14);
        assert!(v_matrix(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn boundary_limit_of_zero() {
        let r = boundary_limit(|_| Ok(c(0.0, 0.0)), std::f64::consts::FRAC_PI_2, 1e-12).unwrap();
        assert_eq!(r.estimate, c(0.0, 0.0));
        assert_eq!(r.spread, 0.0);
    }

    #[test]
    fn boundary_limit_detects_oscillation() {
        let f = |z: Complex64| Ok(c((z.im).sin() * 0.5, 0.0));
        assert!(matches!(boundary_limit(f, std::f64::consts::FRAC_PI_2, 1e-3), Err(Error::NoLimit { .. })));
    }

    #[test]
    fn boundary_limit_of_fixed_point() {
        let a = c(0.6, 0.0);
        let r = boundary_limit(|z| riccati_fixed_point(z, a), std::f64::consts::FRAC_PI_2, 1e-6).unwrap();
        assert!((r.estimate - 1.0 / 3.0).norm() < 1e-8);
    }
}
