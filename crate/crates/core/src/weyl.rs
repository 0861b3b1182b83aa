//! Weyl disks, limit point / limit circle classification and the half-line
//! Schur functions as limits of nested disks.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::coefficients::{ArovParameters, CanonicalSystem};
use crate::error::{Error, Result};
use crate::mat2::{j_defect, mobius_right, su11_normalizer, JClass, Mat2, ProjPoint, ScaledMat2};
use crate::propagate::{expm_trace_free, transfer_scaled};

/// Allowed violation of disk nesting while a Schur function is being resolved.
pub const NEST_SLACK: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disk {
    pub center: Complex64,
    pub radius: f64,
}

impl Disk {
    /// The closed unit disk, `D(z, 0)`.
    pub const fn unit() -> Self {
        Self { center: Complex64::new(0.0, 0.0), radius: 1.0 }
    }

    pub fn contains(&self, w: Complex64, tol: f64) -> bool {
        (w - self.center).norm() <= self.radius + tol
    }

    /// `r_outer − r − |c_outer − c|`, nonnegative exactly when `self ⊆ outer`.
    pub fn nesting_slack(&self, outer: &Disk) -> f64 {
        outer.radius - self.radius - (outer.center - self.center).norm()
    }
}

/// The Weyl disk `{w : (w, 1) T j T* (w, 1)* >= 0}` of a j-contractive `T`
/// with determinant 1.
pub fn weyl_disk(t: &Mat2, assume_contractive: bool) -> Result<Disk> {
    if !assume_contractive {
        let class = j_defect(t)?.class;
        if !matches!(class, JClass::Contractive | JClass::Unitary) {
            return Err(Error::Precondition(format!("matrix is {class:?}, not j-contractive")));
        }
    }
    let l = *t * su11_normalizer(t)?;
    let lambda = l.a11.re;
    Ok(Disk { center: -l.a21 / lambda, radius: 1.0 / (lambda * lambda) })
}

/// Weyl disk of a matrix known to have determinant 1, given in scaled form.
pub fn weyl_disk_scaled(t: &ScaledMat2) -> Result<Disk> {
    let m = &t.mat;
    if !m.is_finite() {
        return Err(Error::NonFinite("matrix entries"));
    }
    let q = m.a11.norm_sqr() - m.a12.norm_sqr();
    if q <= 0.0 {
        return Err(Error::Precondition(format!("|a|^2 - |b|^2 = {q:e} is not positive")));
    }
    let center = (m.a22 * m.a12.conj() - m.a21 * m.a11.conj()) / q;
    Ok(Disk { center, radius: (-2.0 * t.log_scale).exp() / q })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitType {
    LimitPoint,
    LimitCircle,
}

/// Limit point exactly when the total `μ`-mass under the tail policy is infinite.
pub fn classify_limit<S: CanonicalSystem + ?Sized>(sys: &S) -> LimitType {
    if sys.limit_point() {
        LimitType::LimitPoint
    } else {
        LimitType::LimitCircle
    }
}

/// Marches a system forward in `ℓ` while keeping `D = j − A j A*`.
///
/// The increments `A D(E) A*` are positive semidefinite, so the disk data
/// `radius = 1/(1 + D11)`, `center = −D21/(1 + D11)` never suffer from the
/// cancellation in `|A11|² − |A12|²` that the raw matrix entries show when
/// the solution grows quickly.
pub struct DiskFlow<'a, S: ?Sized> {
    sys: &'a S,
    z: Complex64,
    t: ScaledMat2,
    /// `j − A j A*`, scaled by `exp(−2 t.log_scale)`.
    d: Mat2,
    ell: f64,
}

impl<'a, S: CanonicalSystem + ?Sized> DiskFlow<'a, S> {
    pub fn new(sys: &'a S, z: Complex64) -> Self {
        Self { sys, z, t: ScaledMat2::identity(), d: Mat2::zero(), ell: 0.0 }
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// The transfer matrix `A(z, ℓ)` at the current length.
    pub fn transfer(&self) -> ScaledMat2 {
        self.t
    }

    pub fn advance(&mut self, to: f64) -> Result<()> {
        let j = Mat2::j();
        for piece in self.sys.grid().pieces(self.ell, to)? {
            let dm = self.sys.density(piece.index) * piece.width;
            if dm <= 0.0 {
                continue;
            }
            let g = self.sys.generator(piece.index, self.z);
            let steps = (g.max_abs() * dm).ceil().max(1.0);
            let h = dm / steps;
            let e = expm_trace_free(&g, h);
            let de = (j - e * j * e.adjoint()).hermitian_part();
            for _ in 0..steps as u64 {
                self.d = self.d + self.t.mat * de * self.t.mat.adjoint();
                let next = ScaledMat2::new(self.t.log_scale, self.t.mat * e);
                let shift = next.log_scale - self.t.log_scale;
                self.d = self.d * (-2.0 * shift).exp();
                self.t = next;
            }
        }
        self.ell = to.max(self.ell);
        if self.d.is_finite() && self.t.mat.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite("disk flow state"))
        }
    }

    pub fn disk(&self) -> Disk {
        let s = (-2.0 * self.t.log_scale).exp();
        let q = s + self.d.a11.re;
        Disk { center: -self.d.a21 / q, radius: s / q }
    }
}

/// A Schur function value resolved to a given disk radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchurValue {
    pub value: Complex64,
    /// Radius of the last disk used.
    pub residual_radius: f64,
    /// Length at which the disk was taken.
    pub l_stop: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchurOptions {
    /// Stop once the disk radius drops below this.
    pub tol: f64,
    /// First length inspected; later lengths double.
    pub l_start: f64,
    /// Largest length inspected, `10⁴ / Im z` when unset.
    pub l_max: Option<f64>,
}

impl Default for SchurOptions {
    fn default() -> Self {
        Self { tol: 1e-9, l_start: 1.0, l_max: None }
    }
}

impl SchurOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// `s₊(z)` as the center of the Weyl disks once they are smaller than `tol`.
pub fn schur_plus<S: CanonicalSystem + ?Sized>(z: Complex64, sys: &S, tol: f64) -> Result<SchurValue> {
    schur_plus_with(z, sys, &SchurOptions::with_tol(tol))
}

pub fn schur_plus_with<S: CanonicalSystem + ?Sized>(z: Complex64, sys: &S, opts: &SchurOptions) -> Result<SchurValue> {
    if !z.is_finite() {
        return Err(Error::NonFinite("spectral parameter"));
    }
    if !(z.im > 0.0) {
        return Err(Error::Precondition(format!("Im z = {} is not positive", z.im)));
    }
    if !(opts.tol > 0.0) || !(opts.l_start > 0.0) {
        return Err(Error::Precondition("tolerance and start length must be positive".into()));
    }
    if let Some(a) = sys.unimodular_constant() {
        return Ok(SchurValue { value: a, residual_radius: 0.0, l_stop: 0.0 });
    }
    if classify_limit(sys) == LimitType::LimitCircle {
        return Err(Error::Precondition("system is in the limit circle case".into()));
    }
    let l_max = opts.l_max.unwrap_or(1e4 / z.im);
    let mut flow = DiskFlow::new(sys, z);
    let mut prev = Disk::unit();
    let mut ell = opts.l_start.min(l_max);
    loop {
        flow.advance(ell)?;
        let disk = flow.disk();
        let slack = disk.nesting_slack(&prev);
        if slack < -NEST_SLACK {
            return Err(Error::Inconsistent(format!("Weyl disks not nested at l = {ell} (slack {slack:e})")));
        }
        if disk.radius < opts.tol {
            return Ok(SchurValue { value: disk.center, residual_radius: disk.radius, l_stop: ell });
        }
        if ell >= l_max {
            return Err(Error::Budget { last: disk, l_stop: ell, tol: opts.tol });
        }
        prev = disk;
        ell = (2.0 * ell).min(l_max);
    }
}

/// `v(z) = (z − i)/(z + i)`.
pub fn cayley_v(z: Complex64) -> Complex64 {
    (z - Complex64::i()) / (z + Complex64::i())
}

/// `s₋(z) = v(z) · s₊(z)` of the reflected left half-line (stored mirrored).
pub fn schur_minus(z: Complex64, left: &ArovParameters, tol: f64) -> Result<SchurValue> {
    schur_minus_with(z, left, &SchurOptions::with_tol(tol))
}

pub fn schur_minus_with(z: Complex64, left: &ArovParameters, opts: &SchurOptions) -> Result<SchurValue> {
    let v = cayley_v(z);
    let r = schur_plus_with(z, &left.reflect(), opts)?;
    Ok(SchurValue { value: v * r.value, residual_radius: v.norm() * r.residual_radius, ..r })
}

/// `s(ℓ)` from `(s(ℓ), 1) ≃ (s, 1) T`.
pub fn schur_stripped(s: Complex64, t: &Mat2) -> Result<Complex64> {
    match mobius_right(ProjPoint::Finite(s), t)? {
        ProjPoint::Finite(w) => Ok(w),
        ProjPoint::Infinity => Err(Error::DegenerateAction),
    }
}

/// `m = i(1 + s)/(1 − s)`, with `s = 1` mapped to the pole.
pub fn herglotz_from_schur(s: Complex64) -> ProjPoint {
    let one = Complex64::new(1.0, 0.0);
    if s == one {
        ProjPoint::Infinity
    } else {
        ProjPoint::Finite(Complex64::i() * (one + s) / (one - s))
    }
}

/// Samples of the stripped Schur functions `s₊(z, ℓ)` on a `(z, ℓ)` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SchurTrace {
    pub zs: Vec<Complex64>,
    pub ells: Vec<f64>,
    /// `s₊(z_j)` with its convergence data.
    pub limits: Vec<SchurValue>,
    /// `values[j][k] = s₊(z_j, ℓ_k)`.
    pub values: Vec<Vec<Complex64>>,
}

pub fn schur_trace<S: CanonicalSystem + ?Sized>(
    sys: &S,
    zs: &[Complex64],
    ells: &[f64],
    opts: &SchurOptions,
) -> Result<SchurTrace> {
    let rows = zs
        .par_iter()
        .map(|&z| {
            let limit = schur_plus_with(z, sys, opts)?;
            let values = ells
                .iter()
                .map(|&l| schur_stripped(limit.value, &transfer_scaled(z, sys, l)?.mat))
                .collect::<Result<Vec<_>>>()?;
            Ok((limit, values))
        })
        .collect::<Result<Vec<_>>>()?;
    let (limits, values) = rows.into_iter().unzip();
    Ok(SchurTrace { zs: zs.to_vec(), ells: ells.to_vec(), limits, values })
}
