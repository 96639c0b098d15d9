//! Joint eigenstates of `chi_X(Q)` and `chi_Y(P)` for periodic `X`, `Y`.
//!
//! A position window `W` (support shorter than the period `T`) is repeated
//! every `T` with complex weights; the weights are samples of the inverse
//! transform `M` of a momentum window `M~` whose support is shorter than
//! `2 pi / T`. The resulting state lives on copies of `supp W` in position
//! and on copies of `supp M~` in momentum.
//!
//! Two independent routes produce the weights:
//!
//! * [`comb_construct`] evaluates `M` at the comb points,
//! * [`fourier_series_construct`] takes Fourier coefficients of the
//!   periodised window `M~_p(k) = sum_n M~(k - 2 pi n / T)` over one cell.
//!
//! On a finite grid the state is implicitly periodic with the grid extent
//! `E`, so the weights that make it an exact discrete joint eigenstate are
//! those of `M` periodised over `E`. Both routes produce exactly that when
//! `E` is a whole number of periods (see [`Coefficients`]).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::{fourier, Grid, Space, Wavefunction, C64};
use crate::quadrature::Composite;
use crate::sets::{project_momentum, project_position, IntervalSet, PeriodicSet, Region};

/// Default tolerance for the fixed-point residuals.
pub const EIGENSTATE_TOL: f64 = 1e-6;

const GL_ORDER: usize = 24;

pub trait PositionWindow: fmt::Debug + Send + Sync {
    /// Half-open support `[lo, hi)` relative to the window centre.
    fn support(&self) -> (f64, f64);

    /// Value at `x`; zero outside the support.
    fn eval(&self, x: f64) -> C64;

    fn norm_sq(&self) -> f64 {
        let (lo, hi) = self.support();
        Composite::new(GL_ORDER).integrate_real(lo, hi, 32, |x| self.eval(x).norm_sqr())
    }
}

pub trait MomentumWindow: fmt::Debug + Send + Sync {
    /// Half-open support `[lo, hi)`.
    fn support(&self) -> (f64, f64);

    /// Value at `k`; zero outside the support.
    fn eval(&self, k: f64) -> C64;

    /// `M(x) = (2 pi)^(-1/2) integral M~(k) exp(-i k x) dk` by composite
    /// Gauss-Legendre quadrature, with panels scaled to the oscillation.
    fn inverse_at(&self, x: f64) -> C64 {
        let (lo, hi) = self.support();
        let panels = 4 + ((x.abs() * (hi - lo)) / PI).ceil() as usize;
        let inner = |k: f64| {
            // evaluate strictly inside so half-open supports do not drop the last node
            self.eval(k.clamp(lo, hi - f64::EPSILON * hi.abs().max(1.0))) * C64::from_polar(1.0, -k * x)
        };
        Composite::new(GL_ORDER).integrate(lo, hi, panels, inner) / (2.0 * PI).sqrt()
    }

    /// Trapezoid rule for the same integral with node spacing `step`, nodes
    /// on multiples of `step`. Equals `sum_l M(x + l * 2 pi / step)`.
    fn periodized_inverse_at(&self, x: f64, step: f64) -> C64 {
        let (lo, hi) = self.support();
        let support = IntervalSet::interval(lo, hi).expect("window support is a valid interval");
        let first = (lo / step).floor() as i64 - 1;
        let last = (hi / step).ceil() as i64 + 1;
        let sum: C64 = (first..=last)
            .map(|q| q as f64 * step)
            .filter(|&k| support.contains(k))
            .map(|k| self.eval(k) * C64::from_polar(1.0, -k * x))
            .sum();
        sum * step / (2.0 * PI).sqrt()
    }
}

/// `W(x) = 1` on `[-a/2, a/2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectWindow {
    width: f64,
}

impl RectWindow {
    pub fn width(&self) -> f64 {
        self.width
    }
}

impl PositionWindow for RectWindow {
    fn support(&self) -> (f64, f64) {
        (-0.5 * self.width, 0.5 * self.width)
    }

    fn eval(&self, x: f64) -> C64 {
        let (lo, hi) = self.support();
        let eps = 1e-10 * self.width;
        if x >= lo - eps && x < hi - eps {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }

    fn norm_sq(&self) -> f64 {
        self.width
    }
}

/// Rectangular slit window of width `a`; requires `0 < a < t`.
pub fn rect_window(a: f64, t: f64) -> Result<RectWindow> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid(format!("slit width must be positive, got {a}")));
    }
    if a >= t {
        return Err(Error::SupportViolation(format!("slit width {a} must be smaller than the period {t}")));
    }
    Ok(RectWindow { width: a })
}

/// `M~(k) = cos(T' k / 2)` on `[-pi/T', pi/T')`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CosineWindow {
    t_prime: f64,
}

impl CosineWindow {
    pub fn t_prime(&self) -> f64 {
        self.t_prime
    }

    /// Closed form of the inverse transform (sum of two shifted sincs).
    pub fn inverse_closed_form(&self, x: f64) -> f64 {
        let alpha = 0.5 * self.t_prime;
        let b = PI / self.t_prime;
        let part = |c: f64| if c.abs() < 1e-12 { b } else { (c * b).sin() / c };
        (part(alpha - x) + part(alpha + x)) / (2.0 * PI).sqrt()
    }
}

impl MomentumWindow for CosineWindow {
    fn support(&self) -> (f64, f64) {
        (-PI / self.t_prime, PI / self.t_prime)
    }

    fn eval(&self, k: f64) -> C64 {
        let (lo, hi) = self.support();
        if k >= lo && k < hi {
            C64::new((0.5 * self.t_prime * k).cos(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }
}

/// Cosine momentum window; requires `t_prime > t`.
pub fn cosine_momentum_window(t_prime: f64, t: f64) -> Result<CosineWindow> {
    if !(t_prime.is_finite() && t_prime > t) {
        return Err(invalid(format!("momentum window needs T' > T, got T' = {t_prime}, T = {t}")));
    }
    Ok(CosineWindow { t_prime })
}

/// `M~(k) = 1` on `[-d, d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlatWindow {
    half_width: f64,
}

impl FlatWindow {
    pub fn new(half_width: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(invalid(format!("flat window half-width must be positive, got {half_width}")));
        }
        Ok(Self { half_width })
    }
}

impl MomentumWindow for FlatWindow {
    fn support(&self) -> (f64, f64) {
        (-self.half_width, self.half_width)
    }

    fn eval(&self, k: f64) -> C64 {
        if k >= -self.half_width && k < self.half_width {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }
}

/// The window pair defining a joint eigenstate, plus the comb period and
/// offset (`T/2` puts two copies symmetrically at `+-T/2`).
#[derive(Clone, Debug)]
pub struct EnvelopeSpec {
    pub position: Arc<dyn PositionWindow>,
    pub momentum: Arc<dyn MomentumWindow>,
    pub period: f64,
    pub shift: f64,
}

impl EnvelopeSpec {
    pub fn new(
        position: Arc<dyn PositionWindow>,
        momentum: Arc<dyn MomentumWindow>,
        period: f64,
        shift: f64,
    ) -> Result<Self> {
        let spec = Self { position, momentum, period, shift };
        spec.validate()?;
        Ok(spec)
    }

    /// Rect slit of width `a` with the cosine window, comb shifted by `T/2`.
    pub fn double_slit(a: f64, t: f64, t_prime: f64) -> Result<Self> {
        Self::new(Arc::new(rect_window(a, t)?), Arc::new(cosine_momentum_window(t_prime, t)?), t, 0.5 * t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(invalid(format!("period must be positive, got {}", self.period)));
        }
        if !self.shift.is_finite() {
            return Err(invalid("comb shift must be finite"));
        }
        let (lo, hi) = self.position.support();
        if lo.is_nan() || hi.is_nan() || lo >= hi || hi - lo >= self.period {
            return Err(Error::SupportViolation(format!(
                "position window support [{lo}, {hi}) must be shorter than the period {}",
                self.period
            )));
        }
        let (klo, khi) = self.momentum.support();
        let edge = PI / self.period;
        if klo.is_nan() || khi.is_nan() || klo >= khi || klo <= -edge || khi >= edge {
            return Err(Error::SupportViolation(format!(
                "momentum window support [{klo}, {khi}) must lie strictly inside (-pi/T, pi/T) = ({}, {edge})",
                -edge
            )));
        }
        Ok(())
    }

    /// The periodic position set `X`: copies of `supp W` every `T`.
    pub fn position_set(&self) -> PeriodicSet {
        let (lo, hi) = self.position.support();
        PeriodicSet::new(self.period, IntervalSet::interval(lo, hi).expect("validated"), self.shift, None)
            .expect("validated")
    }

    /// The periodic momentum set `Y`: copies of `supp M~` every `2 pi / T`.
    pub fn momentum_set(&self) -> PeriodicSet {
        let (lo, hi) = self.momentum.support();
        PeriodicSet::new(2.0 * PI / self.period, IntervalSet::interval(lo, hi).expect("validated"), 0.0, None)
            .expect("validated")
    }

    /// `sum_l M~(k - 2 pi l / T) exp(2 pi i l s / T)`, the periodised window
    /// carrying the phase of the comb offset `s`.
    pub fn periodic_envelope(&self, k: f64) -> C64 {
        let p = 2.0 * PI / self.period;
        let centre = (k / p).round() as i64;
        (centre - 1..=centre + 1)
            .map(|l| {
                let q = l as f64 * p;
                self.momentum.eval(k - q) * C64::from_polar(1.0, q * self.shift)
            })
            .sum()
    }
}

/// How comb weights are obtained from `M~`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Coefficients {
    /// Trapezoid rule at the grid's momentum spacing: `M` periodised over
    /// the grid extent. Exact discrete eigenstate when the extent is a
    /// whole number of periods.
    #[default]
    Periodized,
    /// Gauss-Legendre inverse transform: the aperiodic continuum `M`.
    Continuum,
}

/// One copy of the position window in the comb.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Replica {
    pub index: i64,
    pub centre: f64,
    pub weight: C64,
}

#[derive(Clone, Debug)]
pub struct JointEigenstate {
    /// Normalised state.
    pub psi: Wavefunction,
    pub x_set: PeriodicSet,
    pub y_set: PeriodicSet,
    pub spec: EnvelopeSpec,
    /// Weights of the copies actually placed on the grid.
    pub replicas: Vec<Replica>,
    /// Norm squared before normalisation.
    pub raw_norm_sq: f64,
    /// Fraction of `sum |weight|^2` dropped by truncation.
    pub tail_fraction: f64,
    /// `||chi_X(Q) psi - psi||`.
    pub position_residual: f64,
    /// `||chi_Y(P) psi - psi||`.
    pub momentum_residual: f64,
}

impl JointEigenstate {
    pub fn is_joint_eigenstate(&self, tol: f64) -> bool {
        self.position_residual < tol && self.momentum_residual < tol
    }

    /// `||W||^2 * sum |weight|^2`, the norm the construction must have
    /// because the copies do not overlap.
    pub fn predicted_norm_sq(&self) -> f64 {
        self.spec.position.norm_sq() * self.replicas.iter().map(|r| r.weight.norm_sqr()).sum::<f64>()
    }

    /// Fraction of probability in the cells with the given indices.
    pub fn mass_in_cells(&self, indices: &[i64]) -> f64 {
        let kept: f64 = self.replicas.iter().filter(|r| indices.contains(&r.index)).map(|r| r.weight.norm_sqr()).sum();
        let total: f64 = self.replicas.iter().map(|r| r.weight.norm_sqr()).sum();
        kept / total
    }

    /// Mass in the two copies at `shift - T` and `shift` (the `+-T/2` slits
    /// for the double-slit layout).
    pub fn central_pair_mass(&self) -> f64 {
        self.mass_in_cells(&[-1, 0])
    }
}

/// Copies of the window that fit on `grid`: indices `n` with centre
/// `n T + shift` in `[-E/2, E/2)`, and whether the grid wraps onto itself
/// (extent a whole number of periods).
fn grid_replicas(spec: &EnvelopeSpec, grid: &Grid) -> (i64, i64, bool) {
    let t = spec.period;
    let eps = 1e-9 * t;
    let lo = ((grid.origin() - spec.shift - eps) / t).ceil() as i64;
    let hi = ((grid.origin() + grid.extent() - spec.shift - eps) / t).ceil() as i64 - 1;
    let cells = grid.extent() / t;
    let cyclic = (cells - cells.round()).abs() < 1e-9 * cells.max(1.0);
    (lo, hi, cyclic)
}

fn truncated(centre: f64, n_terms: Option<usize>, period: f64) -> bool {
    n_terms.is_some_and(|n| centre.abs() > n as f64 * period + 1e-9 * period)
}

/// Lays the weighted copies on the grid and fills in the diagnostics.
fn assemble(
    spec: &EnvelopeSpec,
    grid: &Grid,
    n_terms: Option<usize>,
    weight_of: impl Fn(i64, f64) -> C64,
) -> Result<JointEigenstate> {
    let (lo, hi, cyclic) = grid_replicas(spec, grid);
    if hi < lo {
        return Err(Error::Resolution("grid is shorter than one period".into()));
    }
    let t = spec.period;
    let all: Vec<Replica> = (lo..=hi)
        .map(|n| {
            let centre = n as f64 * t + spec.shift;
            Replica { index: n, centre, weight: weight_of(n, centre) }
        })
        .collect();
    let total: f64 = all.iter().map(|r| r.weight.norm_sqr()).sum();
    let replicas: Vec<Replica> = all.iter().copied().filter(|r| !truncated(r.centre, n_terms, t)).collect();
    let kept: f64 = replicas.iter().map(|r| r.weight.norm_sqr()).sum();
    let tail_fraction = if total > 0.0 { 1.0 - kept / total } else { 0.0 };

    let x_set = spec.position_set();
    let count = hi - lo + 1;
    let values = grid
        .coords()
        .into_iter()
        .map(|x| {
            let (mut n, r) = x_set.locate(x);
            if cyclic {
                n = lo + (n - lo).rem_euclid(count);
            }
            match replicas.binary_search_by_key(&n, |r| r.index) {
                Ok(i) => replicas[i].weight * spec.position.eval(r),
                Err(_) => C64::new(0.0, 0.0),
            }
        })
        .collect();
    let raw = Wavefunction::new(*grid, values, Space::Position)?;
    raw.check_finite()?;
    let raw_norm_sq = raw.norm_sq();
    let psi = raw.normalized()?;

    let y_set = spec.momentum_set();
    let position_residual = project_position(&psi, &x_set)?.sub(&psi)?.norm();
    let momentum_residual = project_momentum(&psi, &y_set)?.sub(&psi)?.norm();

    Ok(JointEigenstate {
        psi,
        x_set,
        y_set,
        spec: spec.clone(),
        replicas,
        raw_norm_sq,
        tail_fraction,
        position_residual,
        momentum_residual,
    })
}

/// `psi(x) = sum_n M(nT + s) W(x - nT - s)` over the copies on the grid,
/// keeping only `|nT + s| <= n_terms T` when `n_terms` is given.
pub fn comb_construct(
    spec: &EnvelopeSpec,
    n_terms: Option<usize>,
    grid: &Grid,
    coefficients: Coefficients,
) -> Result<JointEigenstate> {
    spec.validate()?;
    if n_terms == Some(0) && spec.shift != 0.0 {
        return Err(invalid("n_terms = 0 keeps no copies unless the comb is unshifted"));
    }
    let step = grid.conjugate().spacing();
    assemble(spec, grid, n_terms, |_, centre| match coefficients {
        Coefficients::Periodized => spec.momentum.periodized_inverse_at(centre, step),
        Coefficients::Continuum => spec.momentum.inverse_at(centre),
    })
}

/// Weights from Fourier coefficients of `M~_p` over one momentum cell,
/// computed with an FFT of the cell's samples. The cell is sampled at the
/// grid's momentum spacing when the grid holds a whole number of periods,
/// which reproduces the periodised weights exactly.
pub fn fourier_series_construct(spec: &EnvelopeSpec, n_coeffs: usize, grid: &Grid) -> Result<JointEigenstate> {
    spec.validate()?;
    if n_coeffs == 0 {
        return Err(invalid("n_coeffs must be at least 1"));
    }
    let (_, _, cyclic) = grid_replicas(spec, grid);
    let t = spec.period;
    let cell = 2.0 * PI / t;
    let nodes = if cyclic {
        (grid.extent() / t).round() as usize
    } else {
        (4 * n_coeffs + 2).max((grid.extent() / t).ceil() as usize).next_power_of_two()
    };
    let h = cell / nodes as f64;
    let offset = (nodes / 2) as i64;
    let k_of = |q: usize| (q as i64 - offset) as f64 * h;

    // c_n = (h / sqrt(2 pi)) sum_q M~_p(k_q) exp(-i k_q s) exp(-i k_q n T)
    //     = (h / sqrt(2 pi)) exp(2 pi i n offset / Q) * DFT_q[...](n)
    let mut buf: Vec<C64> = (0..nodes)
        .map(|q| {
            let k = k_of(q);
            let mp: C64 = (-1..=1).map(|l| spec.momentum.eval(k - l as f64 * cell)).sum();
            mp * C64::from_polar(1.0, -k * spec.shift)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(nodes).process(&mut buf);
    let scale = h / (2.0 * PI).sqrt();
    let coeff = |n: i64| {
        let idx = n.rem_euclid(nodes as i64) as usize;
        let phase = 2.0 * PI * ((n * offset).rem_euclid(nodes as i64)) as f64 / nodes as f64;
        buf[idx] * C64::from_polar(scale, phase)
    };
    assemble(spec, grid, Some(n_coeffs), |n, _| coeff(n))
}

/// Relative L2 mismatch between `fourier(psi)` and the predicted spectrum
/// `(sqrt(2 pi) / T) M~_p(k) W~(k)`, with `W~` the transform of the window
/// sampled at the grid centre. Only meaningful when the comb points are
/// grid points and the grid holds a whole number of periods.
pub fn spectral_identity_residual(state: &JointEigenstate) -> Result<f64> {
    let grid = *state.psi.grid();
    let spec = &state.spec;
    let window = Wavefunction::from_fn(grid, Space::Position, |x| spec.position.eval(x));
    let w_ft = fourier(&window)?;
    let raw = state.psi.map(|v| v * state.raw_norm_sq.sqrt());
    let actual = fourier(&raw)?;
    let pref = (2.0 * PI).sqrt() / spec.period;
    let predicted: Vec<C64> = w_ft
        .grid()
        .coords()
        .iter()
        .zip(w_ft.values())
        .map(|(&k, &w)| spec.periodic_envelope(k) * w * pref)
        .collect();
    let predicted = actual.with_values(predicted)?;
    Ok(actual.sub(&predicted)?.norm() / actual.norm())
}

/// Comparison of a constructed double-slit state's momentum density with
/// [`momentum_density_closed_form`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosedFormCheck {
    /// Relative L2 error between the two densities, each normalised to
    /// unit mass on the momentum grid.
    pub relative_l2: f64,
    /// Probability outside the realised `Y`.
    pub mass_outside_y: f64,
}

pub fn closed_form_check(state: &JointEigenstate, a: f64, t: f64, t_prime: f64) -> Result<ClosedFormCheck> {
    let phi = fourier(&state.psi)?;
    let dk = phi.grid().spacing();
    let closed = phi
        .grid()
        .coords()
        .into_iter()
        .map(|k| momentum_density_closed_form(k, a, t, t_prime))
        .collect::<Result<Vec<f64>>>()?;
    let z: f64 = closed.iter().sum::<f64>() * dk;
    let density = phi.densities();
    let (num, den) = density
        .iter()
        .zip(&closed)
        .fold((0.0, 0.0), |(n, d), (p, c)| (n + (p - c / z).powi(2), d + (c / z).powi(2)));
    let mask = state.y_set.realize(phi.grid());
    let outside: f64 = density.iter().zip(&mask.0).filter(|(_, &inside)| !inside).map(|(p, _)| p).sum::<f64>() * dk;
    Ok(ClosedFormCheck { relative_l2: (num / den).sqrt(), mass_outside_y: outside })
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Unnormalised momentum density of the double-slit eigenstate:
/// `T^-2 sinc^2(a k / 2) cos^2(T' u / 2)` where `u` is `k` reduced to the
/// nearest cell centre, and zero when `|u| > pi / T'`.
pub fn momentum_density_closed_form(k: f64, a: f64, t: f64, t_prime: f64) -> Result<f64> {
    if !(t_prime > t && t > 0.0) {
        return Err(invalid(format!("closed form needs T' > T > 0, got T = {t}, T' = {t_prime}")));
    }
    let cell = 2.0 * PI / t;
    let u = k - (k / cell).round() * cell;
    let envelope = sinc(0.5 * a * k).powi(2) / (t * t);
    Ok(if u.abs() <= PI / t_prime { envelope * (0.5 * t_prime * u).cos().powi(2) } else { 0.0 })
}

/// Two-slit far-field intensity `sinc^2(a k / 2) cos^2(T k / 2)`.
pub fn double_slit_reference(a: f64, t: f64, k: f64) -> f64 {
    sinc(0.5 * a * k).powi(2) * (0.5 * t * k).cos().powi(2)
}
