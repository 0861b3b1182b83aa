//! Coefficient data for canonical systems.
//!
//! All coefficients are piecewise constant on a grid `0 = ℓ0 < ℓ1 < … < ℓN`.
//! Beyond `ℓN` the tail policy decides what happens: the last interval is
//! extended, the whole pattern repeats, or the system simply ends.

pub mod file;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoefficientError, Error, Result};
use crate::mat2::Mat2;

/// Slack on `|a| <= 1`.
pub const COEFF_TOL: f64 = 1e-12;
/// Slack on the structural constraints of general coefficients.
pub const GENERAL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TailPolicy {
    /// Continue with the last interval's values forever.
    #[default]
    #[serde(rename = "constant")]
    ConstantExtend,
    /// Repeat the stored pattern with period `ℓN`.
    Periodic,
    /// The system stops at `ℓN`.
    Finite,
}

/// Which normalization a transfer family (or a system's natural family) obeys.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gauge {
    /// `A(i, ℓ)` lower triangular with positive diagonal.
    Arov,
    /// `A(0, ℓ) = I`.
    PdB,
    Raw,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    knots: Vec<f64>,
    tail: TailPolicy,
}

/// A maximal subinterval on which the coefficients are constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    /// Index of the stored interval providing the coefficients.
    pub index: usize,
    pub start: f64,
    pub width: f64,
}

impl Grid {
    /// `knots` must start at 0 and increase strictly.
    pub fn new(knots: Vec<f64>, tail: TailPolicy) -> Result<Self, CoefficientError> {
        if knots.len() < 2 {
            return Err(CoefficientError::EmptyGrid);
        }
        if knots[0] != 0.0 {
            return Err(CoefficientError::GridOrigin(knots[0]));
        }
        for (i, w) in knots.windows(2).enumerate() {
            if !w[1].is_finite() {
                return Err(CoefficientError::NonFinite { field: "grid", index: i + 1 });
            }
            if w[1] <= w[0] {
                return Err(CoefficientError::GridNotIncreasing { index: i + 1, prev: w[0], next: w[1] });
            }
        }
        Ok(Self { knots, tail })
    }

    /// Grid whose knots after the origin are `breaks`.
    pub fn from_breaks(breaks: &[f64], tail: TailPolicy) -> Result<Self, CoefficientError> {
        let mut knots = Vec::with_capacity(breaks.len() + 1);
        knots.push(0.0);
        knots.extend_from_slice(breaks);
        Self::new(knots, tail)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn tail(&self) -> TailPolicy {
        self.tail
    }

    pub fn intervals(&self) -> usize {
        self.knots.len() - 1
    }

    /// Last stored knot.
    pub fn end(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn width(&self, k: usize) -> f64 {
        self.knots[k + 1] - self.knots[k]
    }

    /// Largest length the system reaches (`∞` unless the tail is finite).
    pub fn reach(&self) -> f64 {
        match self.tail {
            TailPolicy::Finite => self.end(),
            _ => f64::INFINITY,
        }
    }

    fn check_range(&self, from: f64, to: f64) -> Result<()> {
        if !from.is_finite() || !to.is_finite() {
            return Err(Error::NonFinite("length"));
        }
        if from < 0.0 || to < from {
            return Err(Error::Precondition(format!("invalid length range [{from}, {to}]")));
        }
        let end = self.end();
        if self.tail == TailPolicy::Finite && to > end * (1.0 + 1e-14) {
            return Err(Error::Domain { requested: to, end });
        }
        Ok(())
    }

    /// Pieces covering `[from, to]`, in order.
    pub fn pieces(&self, from: f64, to: f64) -> Result<Pieces<'_>> {
        self.check_range(from, to)?;
        let to = if self.tail == TailPolicy::Finite { to.min(self.end()) } else { to };
        let from = from.min(to);
        let n = self.intervals();
        let end = self.end();
        let (period, local) = match self.tail {
            TailPolicy::Periodic if from >= end => {
                let p = (from / end).floor();
                let mut local = from - p * end;
                let mut p = p as u64;
                if local >= end {
                    local -= end;
                    p += 1;
                }
                (p, local.max(0.0))
            }
            _ => (0, from),
        };
        let k = if local >= end {
            n
        } else {
            self.knots.partition_point(|&x| x <= local) - 1
        };
        Ok(Pieces { grid: self, k, period, cur: from, to })
    }

    /// Index of the interval containing `ℓ` (right-continuous), honouring the tail.
    pub fn locate(&self, ell: f64) -> Option<usize> {
        if !(ell >= 0.0) {
            return None;
        }
        let end = self.end();
        let n = self.intervals();
        if ell < end {
            return Some(self.knots.partition_point(|&x| x <= ell) - 1);
        }
        match self.tail {
            TailPolicy::ConstantExtend => Some(n - 1),
            TailPolicy::Periodic => {
                let local = ell - (ell / end).floor() * end;
                let local = if local >= end { 0.0 } else { local.max(0.0) };
                Some(self.knots.partition_point(|&x| x <= local) - 1)
            }
            TailPolicy::Finite => (ell == end).then_some(n - 1),
        }
    }
}

/// Iterator over the constant pieces of a grid between two lengths.
pub struct Pieces<'a> {
    grid: &'a Grid,
    k: usize,
    period: u64,
    cur: f64,
    to: f64,
}

impl Iterator for Pieces<'_> {
    type Item = Piece;

    fn next(&mut self) -> Option<Piece> {
        let g = self.grid;
        let n = g.intervals();
        loop {
            if self.cur >= self.to {
                return None;
            }
            let (index, piece_end) = if self.k < n {
                let offset = self.period as f64 * g.end();
                (self.k, offset + g.knots[self.k + 1])
            } else {
                match g.tail {
                    TailPolicy::ConstantExtend => (n - 1, f64::INFINITY),
                    TailPolicy::Periodic => {
                        self.k = 0;
                        self.period += 1;
                        continue;
                    }
                    TailPolicy::Finite => return None,
                }
            };
            let stop = piece_end.min(self.to);
            let piece = Piece { index, start: self.cur, width: stop - self.cur };
            self.cur = stop;
            if stop >= piece_end {
                self.k += 1;
            }
            if piece.width > 0.0 {
                return Some(piece);
            }
        }
    }
}

/// Interface shared by the two coefficient models: per-interval generator of
/// `A' = A · G · density` and the per-interval density.
pub trait CanonicalSystem: Sync {
    fn grid(&self) -> &Grid;
    /// Generator per unit of measure on interval `k`, e.g. `(izA − B)j`.
    fn generator(&self, k: usize, z: Complex64) -> Mat2;
    /// Measure density on interval `k`.
    fn density(&self, k: usize) -> f64;
    /// Integrand of the exponential type per unit length on interval `k`.
    fn type_density(&self, k: usize) -> f64;
    /// Normalization obeyed by the solution family.
    fn gauge(&self) -> Gauge;
    /// Whether the disk intersection at `+∞` is a single point.
    fn limit_point(&self) -> bool {
        let g = self.grid();
        match g.tail() {
            TailPolicy::Finite => false,
            TailPolicy::ConstantExtend => self.density(g.intervals() - 1) > 0.0,
            TailPolicy::Periodic => (0..g.intervals()).any(|k| self.density(k) > 0.0),
        }
    }
    /// The value `a` when the system is the unimodular constant `a`.
    fn unimodular_constant(&self) -> Option<Complex64> {
        None
    }
}

/// Canonical-system parameters in Arov gauge: the measure density `m` and the
/// coefficient `a`, both constant per interval.
#[derive(Clone, Debug, PartialEq)]
pub struct ArovParameters {
    grid: Grid,
    density: Vec<f64>,
    coeff: Vec<Complex64>,
}

fn check_len(field: &'static str, got: usize, expected: usize) -> Result<(), CoefficientError> {
    if got != expected {
        return Err(CoefficientError::LengthMismatch { field, got, expected });
    }
    Ok(())
}

impl ArovParameters {
    pub fn new(grid: Grid, density: Vec<f64>, coeff: Vec<Complex64>) -> Result<Self, CoefficientError> {
        let n = grid.intervals();
        check_len("m", density.len(), n)?;
        check_len("a", coeff.len(), n)?;
        for (index, &m) in density.iter().enumerate() {
            if !m.is_finite() {
                return Err(CoefficientError::NonFinite { field: "m", index });
            }
            if m < 0.0 {
                return Err(CoefficientError::NegativeDensity { index, value: m });
            }
        }
        for (index, a) in coeff.iter().enumerate() {
            if !a.is_finite() {
                return Err(CoefficientError::NonFinite { field: "a", index });
            }
            if a.norm() > 1.0 + COEFF_TOL {
                return Err(CoefficientError::CoefficientRange { index, modulus: a.norm() });
            }
        }
        Ok(Self { grid, density, coeff })
    }

    /// Constant coefficients `(m, a)` on `[0, ∞)`, stored as one unit interval.
    pub fn constant(a: Complex64, m: f64) -> Result<Self, CoefficientError> {
        let grid = Grid::new(vec![0.0, 1.0], TailPolicy::ConstantExtend)?;
        Self::new(grid, vec![m], vec![a])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn densities(&self) -> &[f64] {
        &self.density
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeff
    }

    pub fn with_tail(mut self, tail: TailPolicy) -> Self {
        self.grid.tail = tail;
        self
    }

    /// Cumulative measure `μ(ℓ)`.
    pub fn mu_at(&self, ell: f64) -> Result<f64> {
        Ok(self.grid.pieces(0.0, ell)?.map(|p| self.density[p.index] * p.width).sum())
    }

    /// Total measure of `[0, ∞)` (or of the finite system).
    pub fn total_mass(&self) -> f64 {
        if self.limit_point() {
            return f64::INFINITY;
        }
        self.density.iter().enumerate().map(|(k, m)| m * self.grid.width(k)).sum()
    }

    /// Coefficients restricted to `[ℓ0, ∞)` and shifted back to start at 0.
    pub fn strip(&self, ell0: f64) -> Result<Self> {
        let g = &self.grid;
        let end = g.end();
        let span_end = match g.tail {
            TailPolicy::Periodic => ell0 + end,
            TailPolicy::ConstantExtend if ell0 < end => end,
            TailPolicy::ConstantExtend => ell0 + 1.0,
            TailPolicy::Finite if ell0 < end => end,
            TailPolicy::Finite => return Err(Error::Domain { requested: ell0, end }),
        };
        let mut knots = vec![0.0];
        let mut density = Vec::new();
        let mut coeff = Vec::new();
        for p in g.pieces(ell0, span_end)? {
            knots.push(p.start + p.width - ell0);
            density.push(self.density[p.index]);
            coeff.push(self.coeff[p.index]);
        }
        let grid = Grid::new(knots, g.tail)?;
        Ok(Self::new(grid, density, coeff)?)
    }

    /// Parameters of the reflected half-line: `a` conjugated, densities kept.
    ///
    /// Left half-lines are stored mirrored (interval `k` of the storage covers
    /// `[−ℓ_{k+1}, −ℓ_k]`), so the reflection only conjugates.
    pub fn reflect(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            density: self.density.clone(),
            coeff: self.coeff.iter().map(|a| a.conj()).collect(),
        }
    }

    /// The parameters `μ̃(u) = μ(g(u))`, `ã(u) = a(g(u))`, whose solution is
    /// `Ã(z, u) = A(z, g(u))`.
    pub fn reparametrize(&self, g: &GridMap) -> Result<Self> {
        let grid = &self.grid;
        if grid.tail == TailPolicy::Periodic {
            return Err(Error::Precondition(
                "reparametrization of periodic coefficients is not supported".into(),
            ));
        }
        let finite = grid.tail == TailPolicy::Finite;
        let u_end = g.inverse(grid.end());
        let mut breaks: Vec<f64> = grid.knots[1..].iter().map(|&x| g.inverse(x)).collect();
        let kinks = &g.points[1..g.points.len() - 1];
        breaks.extend(kinks.iter().map(|p| p.0).filter(|&u| !finite || u < u_end));
        if let Some(&(last, _)) = kinks.last().filter(|p| !finite && p.0 >= u_end) {
            // the tail must carry the slope after the last kink
            breaks.push(last + 1.0);
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1.0));
        let mut knots = vec![0.0];
        let mut density = Vec::with_capacity(breaks.len());
        let mut coeff = Vec::with_capacity(breaks.len());
        for &u in &breaks {
            let prev = *knots.last().unwrap();
            if u <= prev {
                continue;
            }
            let mid = 0.5 * (prev + u);
            let k = grid
                .locate(g.eval(mid))
                .ok_or_else(|| Error::Precondition("grid map leaves the coefficient domain".into()))?;
            knots.push(u);
            density.push(self.density[k] * g.slope_at(mid));
            coeff.push(self.coeff[k]);
        }
        let tail = if finite { TailPolicy::Finite } else { TailPolicy::ConstantExtend };
        Ok(Self::new(Grid::new(knots, tail)?, density, coeff)?)
    }

    /// Reparametrization by `μ` itself: every remaining interval gets density 1
    /// and the zero-mass intervals disappear.
    pub fn lebesgue_normal_form(&self) -> Result<Self> {
        let mut knots = vec![0.0];
        let mut coeff = Vec::new();
        let mut mu = 0.0;
        for (k, &m) in self.density.iter().enumerate() {
            let dm = m * self.grid.width(k);
            if dm > 0.0 {
                mu += dm;
                knots.push(mu);
                coeff.push(self.coeff[k]);
            }
        }
        if coeff.is_empty() {
            return Err(Error::Precondition("coefficients carry no mass".into()));
        }
        let tail = match self.grid.tail {
            TailPolicy::ConstantExtend if *self.density.last().unwrap() == 0.0 => TailPolicy::Finite,
            t => t,
        };
        let density = vec![1.0; coeff.len()];
        Ok(Self::new(Grid::new(knots, tail)?, density, coeff)?)
    }
}

impl CanonicalSystem for ArovParameters {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn generator(&self, k: usize, z: Complex64) -> Mat2 {
        arov_generator(z, self.coeff[k])
    }

    fn density(&self, k: usize) -> f64 {
        self.density[k]
    }

    fn type_density(&self, k: usize) -> f64 {
        (1.0 - self.coeff[k].norm_sqr()).max(0.0).sqrt() * self.density[k]
    }

    fn gauge(&self) -> Gauge {
        Gauge::Arov
    }

    fn unimodular_constant(&self) -> Option<Complex64> {
        let a = self.coeff[0];
        let uniform = self.coeff.iter().all(|&b| b == a);
        (uniform && (a.norm() - 1.0).abs() <= COEFF_TOL && self.limit_point()).then_some(a)
    }
}

/// `(izA − B)j = [[−iz, −ā(iz+1)], [a(iz−1), iz]]`.
pub fn arov_generator(z: Complex64, a: Complex64) -> Mat2 {
    let iz = Complex64::i() * z;
    let one = Complex64::new(1.0, 0.0);
    Mat2::new(-iz, -a.conj() * (iz + one), a * (iz - one), iz)
}

/// The matrices `A = [[1, −ā], [−a, 1]]` and `B = [[0, ā], [−a, 0]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ABPair {
    pub a: Mat2,
    pub b: Mat2,
}

pub fn ab_from_a(a: Complex64) -> Result<ABPair> {
    if !a.is_finite() {
        return Err(Error::NonFinite("coefficient"));
    }
    if a.norm() > 1.0 + COEFF_TOL {
        return Err(Error::CoefficientRange(a.norm()));
    }
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    Ok(ABPair {
        a: Mat2::new(one, -a.conj(), -a, one),
        b: Mat2::new(zero, a.conj(), -a, zero),
    })
}

impl ABPair {
    /// `A + B = [[1, 0], [−2a, 1]]`.
    pub fn sum(&self) -> Mat2 {
        self.a + self.b
    }

    pub fn generator(&self, z: Complex64) -> Mat2 {
        (self.a * (Complex64::i() * z) - self.b) * Mat2::j()
    }
}

/// General-gauge coefficients `(ν, P, Q)`, not yet validated.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralCoefficients {
    pub grid: Grid,
    pub density: Vec<f64>,
    pub p: Vec<Mat2>,
    pub q: Vec<Mat2>,
}

impl GeneralCoefficients {
    /// Dirac operator: `P = I`, `Q = 0`, unit density.
    pub fn dirac(grid: Grid) -> Self {
        let n = grid.intervals();
        Self { grid, density: vec![1.0; n], p: vec![Mat2::identity(); n], q: vec![Mat2::zero(); n] }
    }

    /// Schrödinger operator with piecewise-constant potential `q`.
    pub fn schrodinger(grid: Grid, potential: &[f64]) -> Self {
        let n = grid.intervals();
        let p = Mat2::real(0.5, 0.5, 0.5, 0.5);
        let q = potential
            .iter()
            .map(|&v| Mat2::real(v - 1.0, v + 1.0, v + 1.0, v - 1.0) * Complex64::new(0.0, 0.5))
            .collect();
        Self { grid, density: vec![1.0; n], p: vec![p; n], q }
    }
}

/// General coefficients that passed [`validate_general`].
#[derive(Clone, Debug, PartialEq)]
pub struct CheckedGeneral(GeneralCoefficients);

impl std::ops::Deref for CheckedGeneral {
    type Target = GeneralCoefficients;
    fn deref(&self) -> &GeneralCoefficients {
        &self.0
    }
}

impl CheckedGeneral {
    pub fn into_inner(self) -> GeneralCoefficients {
        self.0
    }
}

pub fn validate_general(c: GeneralCoefficients) -> Result<CheckedGeneral, CoefficientError> {
    let n = c.grid.intervals();
    check_len("n", c.density.len(), n)?;
    check_len("P", c.p.len(), n)?;
    check_len("Q", c.q.len(), n)?;
    let j = Mat2::j();
    for index in 0..n {
        let nu = c.density[index];
        if !nu.is_finite() {
            return Err(CoefficientError::NonFinite { field: "n", index });
        }
        if nu < 0.0 {
            return Err(CoefficientError::NegativeDensity { index, value: nu });
        }
        let (p, q) = (c.p[index], c.q[index]);
        if !p.is_finite() {
            return Err(CoefficientError::NonFinite { field: "P", index });
        }
        if !q.is_finite() {
            return Err(CoefficientError::NonFinite { field: "Q", index });
        }
        let scale = p.norm_fro().max(q.norm_fro()).max(1.0);
        let tol = GENERAL_TOL * scale;
        if (p - p.adjoint()).max_abs() > tol {
            return Err(CoefficientError::PNotHermitian { index });
        }
        let (min_eigenvalue, _) = p.hermitian_eigenvalues();
        if min_eigenvalue < -tol {
            return Err(CoefficientError::PNotPositive { index, min_eigenvalue });
        }
        let defect = (q + q.adjoint()).max_abs();
        if defect > tol {
            return Err(CoefficientError::QNotAntiHermitian { index, defect });
        }
        let tp = (j * p).trace();
        if tp.norm() > tol {
            return Err(CoefficientError::TraceJP { index, value: tp.norm() });
        }
        let tq = (j * q).trace();
        if tq.norm() > tol {
            return Err(CoefficientError::TraceJQ { index, value: tq.norm() });
        }
    }
    Ok(CheckedGeneral(c))
}

impl CanonicalSystem for CheckedGeneral {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn generator(&self, k: usize, z: Complex64) -> Mat2 {
        (self.p[k] * (Complex64::i() * z) - self.q[k]) * Mat2::j()
    }

    fn density(&self, k: usize) -> f64 {
        self.density[k]
    }

    fn type_density(&self, k: usize) -> f64 {
        self.p[k].det().re.max(0.0).sqrt() * self.density[k]
    }

    fn gauge(&self) -> Gauge {
        let pdb = self.q.iter().zip(&self.density).all(|(q, &n)| n == 0.0 || q.max_abs() == 0.0);
        if pdb {
            Gauge::PdB
        } else {
            Gauge::Raw
        }
    }
}

/// Continuous increasing piecewise-linear map `g` with `g(0) = 0`, extended
/// beyond its last point with the last slope.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMap {
    points: Vec<(f64, f64)>,
}

impl GridMap {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 || points[0] != (0.0, 0.0) {
            return Err(Error::Precondition("grid map must start at (0, 0) and have two points".into()));
        }
        for w in points.windows(2) {
            let ok = w[1].0.is_finite() && w[1].1.is_finite() && w[1].0 > w[0].0 && w[1].1 > w[0].1;
            if !ok {
                return Err(Error::Precondition(format!(
                    "grid map is not strictly increasing between {:?} and {:?}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { points })
    }

    /// `g(u) = c·u`.
    pub fn linear(c: f64) -> Result<Self> {
        Self::new(vec![(0.0, 0.0), (1.0, c)])
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    fn segment_by(&self, x: f64, coord: impl Fn(&(f64, f64)) -> f64) -> usize {
        let i = self.points.partition_point(|p| coord(p) <= x);
        i.clamp(1, self.points.len() - 1) - 1
    }

    pub fn eval(&self, u: f64) -> f64 {
        let i = self.segment_by(u, |p| p.0);
        let (p, q) = (self.points[i], self.points[i + 1]);
        p.1 + (u - p.0) * (q.1 - p.1) / (q.0 - p.0)
    }

    pub fn inverse(&self, x: f64) -> f64 {
        let i = self.segment_by(x, |p| p.1);
        let (p, q) = (self.points[i], self.points[i + 1]);
        p.0 + (x - p.1) * (q.0 - p.0) / (q.1 - p.1)
    }

    pub fn slope_at(&self, u: f64) -> f64 {
        let i = self.segment_by(u, |p| p.0);
        let (p, q) = (self.points[i], self.points[i + 1]);
        (q.1 - p.1) / (q.0 - p.0)
    }
}

/// A two-sided system: `left` stores `(−∞, 0]` mirrored, `right` stores `[0, ∞)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FullLine {
    pub left: ArovParameters,
    pub right: ArovParameters,
}

impl FullLine {
    pub fn new(left: ArovParameters, right: ArovParameters) -> Self {
        Self { left, right }
    }

    /// Constant coefficients on the whole line.
    pub fn constant(a: Complex64, m: f64) -> Result<Self, CoefficientError> {
        let p = ArovParameters::constant(a, m)?;
        Ok(Self { left: p.clone(), right: p })
    }
}
