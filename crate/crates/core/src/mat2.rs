//! Dense 2×2 complex matrices, the signature matrices `j` and `j1`, the
//! j-classification of a matrix and the right Moebius action on the
//! projective line.
//!
//! Matrices act on row vectors from the right, so the transfer matrix over
//! `[t1, t3]` is the product `A(t1, t2) * A(t2, t3)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `|det - 1|` for values tagged as transfer matrices.
pub const DET_TOL: f64 = 1e-10;
/// Eigenvalues of `j - T j T*` within this band (relative to `‖T‖²`) count as zero.
pub const CLASS_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a11: Complex64,
    pub a12: Complex64,
    pub a21: Complex64,
    pub a22: Complex64,
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.a11, self.a12, self.a21, self.a22
        )
    }
}

impl Mat2 {
    pub const fn new(a11: Complex64, a12: Complex64, a21: Complex64, a22: Complex64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub const fn real(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self::new(
            Complex64::new(a11, 0.0),
            Complex64::new(a12, 0.0),
            Complex64::new(a21, 0.0),
            Complex64::new(a22, 0.0),
        )
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn diag(d1: Complex64, d2: Complex64) -> Self {
        Self::new(d1, ZERO, ZERO, d2)
    }

    /// The signature matrix `j = diag(-1, 1)`.
    pub const fn j() -> Self {
        Self::real(-1.0, 0.0, 0.0, 1.0)
    }

    /// The swap matrix `j1 = [[0, 1], [1, 0]]` used by the half-line reflection.
    pub const fn j1() -> Self {
        Self::real(0.0, 1.0, 1.0, 0.0)
    }

    pub fn det(&self) -> Complex64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> Complex64 {
        self.a11 + self.a22
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.a11.conj(), self.a21.conj(), self.a12.conj(), self.a22.conj())
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a11, self.a21, self.a12, self.a22)
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self::new(self.a11.conj(), self.a12.conj(), self.a21.conj(), self.a22.conj())
    }

    pub fn adjugate(&self) -> Self {
        Self::new(self.a22, -self.a12, -self.a21, self.a11)
    }

    /// Inverse, or `None` when the determinant vanishes exactly.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == ZERO || !d.is_finite() {
            return None;
        }
        Some(self.adjugate().scale(d.inv()))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.a11 * c, self.a12 * c, self.a21 * c, self.a22 * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self::new(self.a11 * c, self.a12 * c, self.a21 * c, self.a22 * c)
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|c| c.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.entries().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral (operator 2-) norm, from the closed form for the largest
    /// singular value of a 2×2 matrix.
    pub fn norm_op(&self) -> f64 {
        let s = self.max_abs();
        if s == 0.0 {
            return 0.0;
        }
        let m = self.scale_real(1.0 / s);
        let f2 = m.norm_fro().powi(2);
        let d = m.det().norm();
        let disc = (f2 * f2 - 4.0 * d * d).max(0.0).sqrt();
        s * ((f2 + disc) / 2.0).sqrt()
    }

    /// Eigenvalues (ascending) of the Hermitian part `(M + M*)/2`.
    pub fn hermitian_eigenvalues(&self) -> (f64, f64) {
        let p = self.a11.re;
        let r = self.a22.re;
        let q = (self.a12 + self.a21.conj()) * 0.5;
        let mean = (p + r) / 2.0;
        let half_gap = (((p - r) / 2.0).powi(2) + q.norm_sqr()).sqrt();
        (mean - half_gap, mean + half_gap)
    }

    /// `(M + M*)/2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale_real(0.5)
    }

    /// Distance to `other` in the max-entry norm.
    pub fn dist(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    /// The row vector `(x, y) M`.
    pub fn row_mul(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        (x * self.a11 + y * self.a21, x * self.a12 + y * self.a22)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a11 + o.a11, self.a12 + o.a12, self.a21 + o.a21, self.a22 + o.a22)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a11 - o.a11, self.a12 - o.a12, self.a21 - o.a21, self.a22 - o.a22)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale_real(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

impl Mul<Complex64> for Mat2 {
    type Output = Mat2;
    fn mul(self, c: Complex64) -> Mat2 {
        self.scale(c)
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, c: f64) -> Mat2 {
        self.scale_real(c)
    }
}

/// A matrix stored as `exp(log_scale) * mat` with `mat` of unit max-entry size.
///
/// Products of transfer matrices at large `|z|` overflow `f64` long before
/// anything interesting happens to the observables, which only depend on the
/// matrix up to a scalar factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledMat2 {
    pub log_scale: f64,
    pub mat: Mat2,
}

impl ScaledMat2 {
    pub fn identity() -> Self {
        Self { log_scale: 0.0, mat: Mat2::identity() }
    }

    pub fn from_mat(mat: Mat2) -> Self {
        Self { log_scale: 0.0, mat }.normalized()
    }

    pub fn new(log_scale: f64, mat: Mat2) -> Self {
        Self { log_scale, mat }.normalized()
    }

    fn normalized(self) -> Self {
        let s = self.mat.max_abs();
        if s == 0.0 || !s.is_finite() {
            return self;
        }
        Self { log_scale: self.log_scale + s.ln(), mat: self.mat.scale_real(1.0 / s) }
    }

    /// The represented matrix, or `None` when it does not fit in `f64`.
    pub fn to_mat(&self) -> Option<Mat2> {
        let f = self.log_scale.exp();
        let m = self.mat.scale_real(f);
        (f.is_finite() && m.is_finite()).then_some(m)
    }

    /// `log ‖M‖` in the spectral norm.
    pub fn log_norm(&self) -> f64 {
        self.log_scale + self.mat.norm_op().ln()
    }
}

impl Mul for ScaledMat2 {
    type Output = ScaledMat2;
    fn mul(self, o: ScaledMat2) -> ScaledMat2 {
        ScaledMat2::new(self.log_scale + o.log_scale, self.mat * o.mat)
    }
}

/// Sign class of `j - T j T*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JClass {
    /// `T j T* - j >= 0`.
    Expanding,
    /// `T j T* = j`.
    Unitary,
    /// `T j T* - j <= 0`.
    Contractive,
    Indefinite,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JDefect {
    /// `j - T j T*`, symmetrized to be exactly Hermitian.
    pub matrix: Mat2,
    /// Eigenvalues of `matrix`, ascending.
    pub eigenvalues: (f64, f64),
    pub class: JClass,
}

pub fn j_defect(t: &Mat2) -> Result<JDefect> {
    if !t.is_finite() {
        return Err(Error::NonFinite("matrix entries"));
    }
    let j = Mat2::j();
    let matrix = (j - *t * j * t.adjoint()).hermitian_part();
    let eigenvalues = matrix.hermitian_eigenvalues();
    let band = CLASS_TOL * t.norm_fro().powi(2).max(1.0);
    let (lo, hi) = eigenvalues;
    let class = if lo.abs() <= band && hi.abs() <= band {
        JClass::Unitary
    } else if lo >= -band {
        JClass::Contractive
    } else if hi <= band {
        JClass::Expanding
    } else {
        JClass::Indefinite
    };
    Ok(JDefect { matrix, eigenvalues, class })
}

/// A point of the projective line: `(w, 1)` or `(1, 0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProjPoint {
    Finite(Complex64),
    Infinity,
}

impl ProjPoint {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            ProjPoint::Finite(w) => Some(w),
            ProjPoint::Infinity => None,
        }
    }

    fn from_row(x: Complex64, y: Complex64) -> Result<Self> {
        if x == ZERO && y == ZERO {
            return Err(Error::DegenerateAction);
        }
        if y == ZERO {
            Ok(ProjPoint::Infinity)
        } else {
            Ok(ProjPoint::Finite(x / y))
        }
    }
}

impl From<Complex64> for ProjPoint {
    fn from(w: Complex64) -> Self {
        ProjPoint::Finite(w)
    }
}

/// Ratio of the entries of the row vector `(w, 1) M`.
pub fn mobius_right(w: ProjPoint, m: &Mat2) -> Result<ProjPoint> {
    let (x, y) = match w {
        ProjPoint::Finite(w) => {
            if !w.is_finite() {
                return Err(Error::NonFinite("projective point"));
            }
            m.row_mul(w, ONE)
        }
        ProjPoint::Infinity => m.row_mul(ONE, ZERO),
    };
    ProjPoint::from_row(x, y)
}

/// The unique `U ∈ SU(1,1)` making `T U` lower triangular with positive
/// diagonal, built from the first row `(a, b)` of `T`.
pub fn su11_normalizer(t: &Mat2) -> Result<Mat2> {
    if !t.is_finite() {
        return Err(Error::NonFinite("matrix entries"));
    }
    let det_err = (t.det() - ONE).norm();
    if det_err > DET_TOL * t.norm_fro().powi(2).max(1.0) {
        return Err(Error::Precondition(format!("det T differs from 1 by {det_err:e}")));
    }
    let (a, b) = (t.a11, t.a12);
    let lambda_sq = a.norm_sqr() - b.norm_sqr();
    if lambda_sq <= 0.0 {
        return Err(Error::Precondition(format!(
            "T is not j-contractive: |a|^2 - |b|^2 = {lambda_sq:e}"
        )));
    }
    let inv = 1.0 / lambda_sq.sqrt();
    Ok(Mat2::new(a.conj(), -b, -b.conj(), a).scale_real(inv))
}
