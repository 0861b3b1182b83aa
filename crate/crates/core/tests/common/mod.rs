//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use arvcanon::{ArovParameters, CanonicalSystem, Complex64, Grid, Mat2, TailPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Uniform point of the disk of radius `r`.
pub fn disk_point(rng: &mut impl Rng, r: f64) -> Complex64 {
    let rho = r * rng.gen::<f64>().sqrt();
    Complex64::from_polar(rho, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Random piecewise system with at most `max_intervals` intervals whose
/// total `μ`-mass over the stored grid equals `mass`.
pub fn random_system(rng: &mut impl Rng, max_intervals: usize, mass: f64, tail: TailPolicy) -> ArovParameters {
    let n = rng.gen_range(1..=max_intervals);
    let mut knots = vec![0.0];
    for _ in 0..n {
        let last = *knots.last().unwrap();
        knots.push(last + rng.gen_range(0.05..0.3));
    }
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.5)).collect();
    let total: f64 = raw.iter().zip(knots.windows(2)).map(|(m, w)| m * (w[1] - w[0])).sum();
    let density = raw.iter().map(|m| m * mass / total).collect();
    let coeff = (0..n).map(|_| disk_point(rng, 0.95)).collect();
    ArovParameters::new(Grid::new(knots, tail).unwrap(), density, coeff).unwrap()
}

pub fn random_upper(rng: &mut impl Rng, re: f64, im: (f64, f64)) -> Complex64 {
    c(rng.gen_range(-re..re), rng.gen_range(im.0..im.1))
}

/// Exponential by its power series, summed until the terms are negligible.
pub fn series_exp(g: &Mat2) -> Mat2 {
    let mut term = Mat2::identity();
    let mut sum = Mat2::identity();
    for n in 1..200 {
        term = term * *g * (1.0 / n as f64);
        sum = sum + term;
        if term.max_abs() < 1e-18 * sum.max_abs() {
            break;
        }
    }
    sum
}

/// Transfer matrix as the product of the iterated-integral series of each
/// piece; for a constant generator the series is the power series of the
/// exponential.
pub fn peano_transfer(z: Complex64, sys: &impl CanonicalSystem, ell: f64) -> Mat2 {
    let mut m = Mat2::identity();
    for p in sys.grid().pieces(0.0, ell).unwrap() {
        let dm = sys.density(p.index) * p.width;
        let g = sys.generator(p.index, z) * dm;
        // split so the series converges quickly
        let parts = (g.max_abs() * 4.0).ceil().max(1.0) as usize;
        let e = series_exp(&(g * (1.0 / parts as f64)));
        for _ in 0..parts {
            m = m * e;
        }
    }
    m
}

/// Transfer matrix from classical RK4 on `A' = A G` with a fixed small step.
pub fn rk4_transfer(z: Complex64, sys: &impl CanonicalSystem, ell: f64, h: f64) -> Mat2 {
    let mut m = Mat2::identity();
    for p in sys.grid().pieces(0.0, ell).unwrap() {
        let g = sys.generator(p.index, z) * sys.density(p.index);
        let steps = (p.width / h).ceil().max(1.0) as usize;
        let dt = p.width / steps as f64;
        for _ in 0..steps {
            let k1 = m * g;
            let k2 = (m + k1 * (dt / 2.0)) * g;
            let k3 = (m + k2 * (dt / 2.0)) * g;
            let k4 = (m + k3 * dt) * g;
            m = m + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        }
    }
    m
}

/// Circle through three points.
pub fn circumcircle(a: Complex64, b: Complex64, c: Complex64) -> (Complex64, f64) {
    let d = 2.0 * (a.re * (b.im - c.im) + b.re * (c.im - a.im) + c.re * (a.im - b.im));
    let (a2, b2, c2) = (a.norm_sqr(), b.norm_sqr(), c.norm_sqr());
    let ux = (a2 * (b.im - c.im) + b2 * (c.im - a.im) + c2 * (a.im - b.im)) / d;
    let uy = (a2 * (c.re - b.re) + b2 * (a.re - c.re) + c2 * (b.re - a.re)) / d;
    let center = Complex64::new(ux, uy);
    (center, (a - center).norm())
}

/// Image of `w` under `(w, 1) ↦ (w, 1) M`.
pub fn moebius(w: Complex64, m: &Mat2) -> Complex64 {
    (w * m.a11 + m.a21) / (w * m.a12 + m.a22)
}

/// Disk `{w : (w,1) T j T* (w,1)* >= 0}` recovered from three boundary points.
pub fn disk_by_circumcircle(t: &Mat2) -> (Complex64, f64) {
    let inv = t.inverse().unwrap();
    let p = |theta: f64| moebius(Complex64::from_polar(1.0, theta), &inv);
    circumcircle(p(0.1), p(2.2), p(4.3))
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Harmonic measure of the arc `[t1, t2]` from the Poisson kernel by quadrature.
pub fn poisson_measure(w: Complex64, t1: f64, t2: f64) -> f64 {
    let k = |t: f64| (1.0 - w.norm_sqr()) / (Complex64::from_polar(1.0, t) - w).norm_sqr();
    integrate(k, t1, t2, 1e-13) / std::f64::consts::TAU
}

/// `s₋(z)` straight from its definition: the disk limit of the family
/// `j1 A(z, −t) j1`, where the left half-line is stored mirrored and
/// `A(z, −t) = E1⁻¹ ⋯ En⁻¹`.
pub fn schur_minus_by_definition(z: Complex64, left: &ArovParameters, t: f64) -> Complex64 {
    let j1 = Mat2::j1();
    let mut m = Mat2::identity();
    for p in left.grid().pieces(0.0, t).unwrap() {
        let dm = left.densities()[p.index] * p.width;
        let g = arvcanon::coefficients::arov_generator(z, left.coefficients()[p.index]);
        let steps = (g.max_abs() * dm).ceil().max(1.0) as usize;
        let e = arvcanon::propagate::expm_trace_free(&g, dm / steps as f64).inverse().unwrap();
        for _ in 0..steps {
            m = m * e;
            m = m * (1.0 / m.max_abs());
        }
    }
    let b = j1 * m * j1;
    // center of the Weyl disk of the scaled matrix
    let q = b.a11.norm_sqr() - b.a12.norm_sqr();
    (b.a22 * b.a12.conj() - b.a21 * b.a11.conj()) / q
}

/// One line of the acceptance report; panics on failure after printing.
pub fn verdict(id: &str, name: &str, pass: bool, detail: String) {
    println!("{id} {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{id} {name} failed: {detail}");
}
